# core/oracle.py - seeded instance generation, fuzz campaigns and refinement rankings

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .catalog import SQUARE, FunctionSpec, ModulusSpec, PRESETS, preset
from .classic_bounds import ratio_extremes, theorem1_bounds, two_point_bounds
from .conf import jensen_setting
from .exceptions import InputError, PreconditionError
from .functional import Instance, WeightVector, certify_convexity, jensen_functional
from .refined_bounds import theorem2_bounds, theorem4_endpoint_bound, theorem6_uniform_q_bounds
from .tolerance import Tolerance, normalized_slack, resolve
from .uniform_convex import (
    eq32_lower_bound,
    require_certified,
    sy_chain_bound,
    thm7_lower_refinement,
    thm7_n2_specials,
    thm7_upper_refinement,
    thm8_merged_bound,
    thm9_relabelled,
)

logger = logging.getLogger(__name__)

NONNEG_SIMPLEX = 'nonneg-simplex'
SIGNED_PREFIX_VALID = 'signed-prefix-valid'
BOUNDED_POSITIVE = 'bounded-positive'
WEIGHT_MODES = (NONNEG_SIMPLEX, SIGNED_PREFIX_VALID, BOUNDED_POSITIVE)

THEOREM_TAGS = ('thm1', 'thm2', 'thm3', 'thm4', 'thm5', 'thm6', 'eq32', 'thm7', 'thm8', 'thm9')
MAX_N = 32
SQUARE_D2 = ModulusSpec(1.0, 2.0)


@dataclass(frozen=True)
class FuzzConfig:
    """
    One campaign: instance i is a pure function of (seed, i). Moduli are the
    catalog's known modulus for the drawn function times one of modulus_factors.
    """

    seed: int = 20240522
    trials: int = 10000
    n_min: int = 2
    n_max: int = 8
    weight_mode: str = NONNEG_SIMPLEX
    functions: Tuple[str, ...] = tuple(PRESETS)
    modulus_factors: Tuple[float, ...] = (1.0, 0.5)
    q_floor: float = 0.05
    tolerance: Tolerance = field(default_factory=Tolerance)

    def __post_init__(self):
        if self.trials < 1:
            raise InputError(f"trials must be >= 1, got {self.trials}")
        if not 2 <= self.n_min <= self.n_max <= MAX_N:
            raise InputError(f"n range must satisfy 2 <= n_min <= n_max <= {MAX_N}, got {self.n_min}..{self.n_max}")
        if self.weight_mode not in WEIGHT_MODES:
            raise InputError(f"unknown weight mode '{self.weight_mode}', expected one of {', '.join(WEIGHT_MODES)}")
        if not self.functions:
            raise InputError("function set is empty")
        for name in self.functions:
            preset(name)
        if not self.modulus_factors or not all(0.0 < c <= 1.0 for c in self.modulus_factors):
            raise InputError(f"modulus factors must lie in (0, 1], got {list(self.modulus_factors)}")
        if not 0.0 < self.q_floor < 0.5:
            raise InputError(f"q floor must lie in (0, 1/2), got {self.q_floor}")

    @classmethod
    def from_settings(cls, **overrides) -> 'FuzzConfig':
        configured = jensen_setting('FUZZ')
        values = {
            'seed': int(configured['SEED']),
            'trials': int(configured['TRIALS']),
            'n_min': int(configured['N_MIN']),
            'n_max': int(configured['N_MAX']),
            'q_floor': float(configured['Q_FLOOR']),
            'tolerance': Tolerance.default(),
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    def as_dict(self) -> Dict:
        return {
            'seed': self.seed,
            'trials': self.trials,
            'n_range': [self.n_min, self.n_max],
            'weight_mode': self.weight_mode,
            'functions': list(self.functions),
            'modulus_factors': list(self.modulus_factors),
            'q_floor': self.q_floor,
            'tolerance': self.tolerance.as_dict(),
        }


def trial_generator(seed: int, index: int) -> np.random.Generator:
    """Counter-based stream for trial `index`: Philox keyed by SeedSequence(seed, spawn_key=(index,))."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(index,))))


def _floored_simplex(rng: np.random.Generator, n: int, floor: float) -> np.ndarray:
    return floor + (1.0 - n * floor) * rng.dirichlet(np.ones(n))


def random_instance(cfg: FuzzConfig, index: int) -> Instance:
    """
    Points are drawn inside the preset interval and sorted, weights are built in
    sorted order (so the signed mode controls the sorted prefix sums directly),
    then everything is shuffled by one common permutation.
    """
    if not 0 <= index < cfg.trials:
        raise InputError(f"trial index {index} outside [0, {cfg.trials})")
    rng = trial_generator(cfg.seed, index)
    n = int(rng.integers(cfg.n_min, cfg.n_max + 1))
    entry = preset(cfg.functions[int(rng.integers(len(cfg.functions)))])
    factor = cfg.modulus_factors[int(rng.integers(len(cfg.modulus_factors)))]
    interval = entry.interval

    x_sorted = np.sort(rng.uniform(interval.a, interval.b, n))
    q_floor = min(cfg.q_floor, 0.5 / n)
    if cfg.weight_mode == NONNEG_SIMPLEX:
        p_bar = rng.dirichlet(np.ones(n))
    elif cfg.weight_mode == SIGNED_PREFIX_VALID:
        prefix = np.append(rng.uniform(0.0, 1.0, n - 1), 1.0)
        p_bar = np.diff(prefix, prepend=0.0)
    else:
        p_bar = _floored_simplex(rng, n, q_floor)
    q_bar = _floored_simplex(rng, n, q_floor)

    order = rng.permutation(n)
    modulus = entry.modulus
    return Instance(
        x=tuple(float(v) for v in x_sorted[order]),
        p=WeightVector(tuple(float(v) for v in p_bar[order])),
        q=WeightVector(tuple(float(v) for v in q_bar[order])),
        f=entry.function,
        interval=interval,
        phi=modulus.scaled(factor) if modulus is not None else None,
    )


@dataclass(frozen=True)
class Outcome:
    check: str
    slack: float
    scale: float
    verified: bool

    @property
    def normalized(self) -> float:
        return normalized_slack(self.slack, self.scale)


def _bound(name, report) -> List[Outcome]:
    return [Outcome(name, report.worst_slack, report.scale, report.verified)]


def _refinement(name, terms) -> Outcome:
    return Outcome(name, terms.slack, terms.scale, terms.verified)


def _two_point_data(inst: Instance):
    """End points of the sorted instance carrying the first sorted weights, as a two-point pair."""
    r = inst.rearrangement()
    a, b = r.x_sorted[0], r.x_sorted[-1]
    return a, b, r.p_bar[0], r.q_bar[0]


def _check_thm5(inst, tol):
    a, b, p1, _ = _two_point_data(inst)
    if not 0.0 < p1 < 1.0 or not a < b:
        raise PreconditionError("two-point bound needs 0 < p1 < 1", [f"p1 = {p1}"])
    return _bound('thm5', two_point_bounds(inst.f, a, b, p1, tol))


def _check_thm7(inst, tol):
    lower = thm7_lower_refinement(inst, tol)
    upper = thm7_upper_refinement(inst, tol)
    checks = [_refinement('thm7_lower', lower), _refinement('thm7_upper', upper)]
    if inst.n == 2 and inst.x[0] != inst.x[1]:
        specials = thm7_n2_specials(inst.f, inst.phi, inst.x[0], inst.x[1], inst.p[0], inst.q[0], tol,
                                    certify=False)
        checks.append(_refinement('thm7_lower_n2', specials.lower))
        checks.append(_refinement('thm7_upper_n2', specials.upper))
    return checks


def _check_thm9(inst, tol):
    a, b, p1, q1 = _two_point_data(inst)
    if not a < b:
        raise PreconditionError("two-point refinement needs distinct end points", [f"a = b = {a}"])
    phi = require_certified(inst.f, inst.phi, inst.interval, tol)
    return [_refinement('thm9', thm9_relabelled(inst.f, phi, a, b, p1, q1, tol, certify=False))]


CHECKS: Dict[str, Callable[[Instance, Tolerance], List[Outcome]]] = {
    'thm1': lambda inst, tol: _bound('thm1', theorem1_bounds(inst, tol)),
    'thm2': lambda inst, tol: _bound('thm2', theorem2_bounds(inst, tol)),
    'thm3': lambda inst, tol: [_refinement('thm3', sy_chain_bound(inst, tol))],
    'thm4': lambda inst, tol: _bound(
        'thm4', theorem4_endpoint_bound(inst.f, inst.interval.a, inst.interval.b, inst.x, inst.p, tol)),
    'thm5': _check_thm5,
    'thm6': lambda inst, tol: _bound('thm6', theorem6_uniform_q_bounds(inst.f, inst.x, inst.p, tol)),
    'eq32': lambda inst, tol: [_refinement('eq32', eq32_lower_bound(inst, tol))],
    'thm7': _check_thm7,
    'thm8': lambda inst, tol: [_refinement('thm8', thm8_merged_bound(inst.rearranged(), tol))],
    'thm9': _check_thm9,
}


def parse_theorems(tags: Sequence[str]) -> Tuple[str, ...]:
    chosen = []
    for tag in tags:
        tag = tag.strip().lower()
        if tag not in CHECKS:
            raise InputError(f"unknown theorem tag '{tag}', expected one of {', '.join(THEOREM_TAGS)}")
        if tag not in chosen:
            chosen.append(tag)
    if not chosen:
        raise InputError("theorem set is empty")
    return tuple(chosen)


@dataclass(frozen=True)
class TrialResult:
    index: int
    outcomes: Tuple[Outcome, ...]
    skipped: Tuple[str, ...]
    instance: Instance


def run_trial(cfg: FuzzConfig, theorems: Sequence[str], index: int) -> TrialResult:
    inst = random_instance(cfg, index)
    outcomes: List[Outcome] = []
    skipped: List[str] = []
    for tag in theorems:
        try:
            outcomes.extend(CHECKS[tag](inst, cfg.tolerance))
        except PreconditionError as exc:
            logger.debug(f"Trial {index}: {tag} inadmissible ({exc})")
            skipped.append(tag)
    return TrialResult(index, tuple(outcomes), tuple(skipped), inst)


@dataclass(frozen=True)
class Violation:
    check: str
    seed: int
    index: int
    slack: float
    scale: float
    instance: Dict


@dataclass(frozen=True)
class SlackStats:
    count: int
    min_normalized: float
    median_normalized: float


@dataclass(frozen=True)
class CampaignSummary:
    """Violations are exactly the outcomes with slack < -tol; stats are keyed by check name."""

    config: FuzzConfig
    theorems: Tuple[str, ...]
    trials: int
    violations: Tuple[Violation, ...]
    stats: Dict[str, SlackStats]
    skipped: Dict[str, int]
    equality_residuals: Dict[str, float]

    @property
    def passed(self) -> bool:
        return not self.violations

    @property
    def worst_normalized_slack(self) -> Optional[float]:
        values = [s.min_normalized for s in self.stats.values()]
        return min(values) if values else None


EQUALITY_CHECKS = ('eq32', 'thm7_lower', 'thm7_upper', 'thm7_lower_n2', 'thm7_upper_n2', 'thm9')
# identities for f = x^2, phi = d^2 only when n = 2
EQUALITY_CHECKS_N2 = ('thm3',)


def _is_square_identity(inst: Instance) -> bool:
    return inst.f == FunctionSpec(SQUARE) and inst.phi == SQUARE_D2


def summarize(cfg: FuzzConfig, theorems: Tuple[str, ...], results: Sequence[TrialResult]) -> CampaignSummary:
    """Index-ordered reduction of trial results."""
    normalized: Dict[str, List[float]] = {}
    skipped: Dict[str, int] = {tag: 0 for tag in theorems}
    residuals: Dict[str, float] = {}
    violations: List[Violation] = []

    for result in sorted(results, key=lambda r: r.index):
        for tag in result.skipped:
            skipped[tag] += 1
        identity = _is_square_identity(result.instance)
        identities = EQUALITY_CHECKS + EQUALITY_CHECKS_N2 if result.instance.n == 2 else EQUALITY_CHECKS
        for outcome in result.outcomes:
            normalized.setdefault(outcome.check, []).append(outcome.normalized)
            if not outcome.verified:
                violations.append(Violation(
                    check=outcome.check,
                    seed=cfg.seed,
                    index=result.index,
                    slack=outcome.slack,
                    scale=outcome.scale,
                    instance=result.instance.as_dict(),
                ))
            if identity and outcome.check in identities:
                residuals[outcome.check] = max(residuals.get(outcome.check, 0.0), abs(outcome.normalized))

    stats = {
        check: SlackStats(
            count=len(values),
            min_normalized=float(np.min(values)),
            median_normalized=float(np.median(values)),
        )
        for check, values in normalized.items()
    }
    return CampaignSummary(
        config=cfg,
        theorems=theorems,
        trials=len(results),
        violations=tuple(violations),
        stats=stats,
        skipped=skipped,
        equality_residuals=residuals,
    )


def run_campaign(cfg: FuzzConfig, theorems: Sequence[str], workers: Optional[int] = None) -> CampaignSummary:
    """Run every selected check on trials 0..cfg.trials-1; parallelism never changes the summary."""
    theorems = parse_theorems(theorems)
    workers = workers or int(jensen_setting('FUZZ')['WORKERS'])
    for name in cfg.functions:
        entry = preset(name)
        if not certify_convexity(entry.function, entry.interval, tol=cfg.tolerance).passed:
            raise InputError(f"catalog entry '{name}' failed the convexity sanity check")

    logger.info(f"Campaign seed={cfg.seed} trials={cfg.trials} mode={cfg.weight_mode} theorems={','.join(theorems)}")
    indices = range(cfg.trials)
    if workers <= 1:
        results = [run_trial(cfg, theorems, i) for i in indices]
    else:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            results = list(executor.map(lambda i: run_trial(cfg, theorems, i), indices))

    summary = summarize(cfg, theorems, results)
    if summary.violations:
        logger.warning(f"Campaign seed={cfg.seed}: {len(summary.violations)} violation(s), "
                       f"first at index {summary.violations[0].index} ({summary.violations[0].check})")
    else:
        logger.info(f"Campaign seed={cfg.seed}: no violations over {summary.trials} trials")
    return summary


@dataclass(frozen=True)
class WitnessReport:
    residuals: Dict[str, float]
    slacks: Dict[str, float]
    checks: Dict[str, bool]

    @property
    def passed(self) -> bool:
        return all(self.checks.values())


def _square(x, p, q=None) -> Instance:
    return Instance.build(x, p, q, f=FunctionSpec(SQUARE), phi=SQUARE_D2)


def equality_witness_suite(trials: int = 1000, seed: int = 20240522,
                           tol: Optional[Tolerance] = None) -> WitnessReport:
    """
    f = x^2 with phi = d^2: the Theorem 7 chains and the pointwise lower bound
    are identities for every n; the chained bound is an identity on random n = 2
    instances, the merged bound is tight on a fixed n = 2 witness, and the fixed
    n = 3 witnesses keep a strictly positive slack.
    """
    tol = resolve(tol)
    cfg = FuzzConfig(seed=seed, trials=trials, n_min=2, n_max=8, functions=('square',),
                     modulus_factors=(1.0,), tolerance=tol)
    pairs = FuzzConfig(seed=seed, trials=trials, n_min=2, n_max=2, functions=('square',),
                       modulus_factors=(1.0,), tolerance=tol)
    residuals = {'eq32': 0.0, 'thm7_lower': 0.0, 'thm7_upper_normalized': 0.0, 'thm3_n2': 0.0}
    within = {name: True for name in residuals}
    for index in range(trials):
        inst = random_instance(cfg, index)
        for name, terms in (
            ('eq32', eq32_lower_bound(inst, tol)),
            ('thm7_lower', thm7_lower_refinement(inst, tol)),
            ('thm7_upper_normalized', thm7_upper_refinement(inst, tol, normalized=True)),
        ):
            residuals[name] = max(residuals[name], abs(normalized_slack(terms.slack, terms.scale)))
            within[name] = within[name] and abs(terms.slack) <= tol.bound(terms.scale)
        chain = sy_chain_bound(random_instance(pairs, index), tol)
        residuals['thm3_n2'] = max(residuals['thm3_n2'], abs(normalized_slack(chain.slack, chain.scale)))
        within['thm3_n2'] = within['thm3_n2'] and abs(chain.slack) <= tol.bound(chain.scale)

    thm8_n2 = thm8_merged_bound(_square((0.0, 1.0), (0.2, 0.8)), tol)
    thm8_n3 = thm8_merged_bound(_square((0.0, 1.0, 2.0), (0.4, 0.1, 0.5)), tol)
    chain_n2 = sy_chain_bound(_square((0.0, 1.0), (0.3, 0.7)), tol)
    chain_n3 = sy_chain_bound(_square((0.0, 1.0, 2.0), WeightVector.uniform(3)), tol)
    slacks = {
        'thm8_n2': thm8_n2.slack,
        'thm8_n3': thm8_n3.slack,
        'thm3_n2': chain_n2.slack,
        'thm3_n3': chain_n3.slack,
    }
    checks = {
        'thm7_identity': within['thm7_lower'] and within['thm7_upper_normalized'],
        'eq32_identity': within['eq32'],
        'thm3_n2_identity': within['thm3_n2'],
        'thm8_n2_tight': abs(thm8_n2.slack) <= tol.bound(thm8_n2.scale),
        'thm8_n3_strict': thm8_n3.slack > 10.0 * tol.bound(thm8_n3.scale),
        'thm3_n2_tight': abs(chain_n2.slack) <= tol.bound(chain_n2.scale),
        'thm3_n3_strict': chain_n3.slack > 10.0 * tol.bound(chain_n3.scale),
    }
    failed = [name for name, ok in checks.items() if not ok]
    if failed:
        logger.warning(f"Equality witnesses failed: {', '.join(failed)}")
    return WitnessReport(residuals=residuals, slacks=slacks, checks=checks)


@dataclass(frozen=True)
class RankedBound:
    name: str
    lower_bound: float
    refinement: float


@dataclass(frozen=True)
class TightnessRanking:
    gap: float
    ranked: Tuple[RankedBound, ...]
    tightest: Tuple[str, ...]
    skipped: Dict[str, str]

    def position(self, name: str) -> int:
        for i, entry in enumerate(self.ranked):
            if entry.name == name:
                return i
        raise KeyError(name)


def tightness_ranking(inst: Instance, tol: Optional[Tolerance] = None, certify: bool = True) -> TightnessRanking:
    """
    Rank the lower bounds on J(p) the refinements imply: m J(q) plus the
    refinement terms for the ratio refinements, the bare terms for the pointwise
    and chained bounds. Entries within tolerance of the best are all tightest.
    """
    tol = resolve(tol)
    skipped: Dict[str, str] = {}
    ranked: List[RankedBound] = []
    gap = jensen_functional(inst.f, inst.x, inst.p)

    def attempt(name, build):
        try:
            ranked.append(build())
        except PreconditionError as exc:
            skipped[name] = str(exc)

    base = {}

    def baseline():
        ratios = ratio_extremes(inst.p, inst.q)
        base['mJq'] = ratios.m * jensen_functional(inst.f, inst.x, inst.q)
        return RankedBound('thm1', base['mJq'], 0.0)

    def ratio_refined(name, terms):
        return RankedBound(name, base['mJq'] + terms.total, terms.total)

    attempt('thm1', baseline)
    attempt('eq32', lambda: _bare('eq32', eq32_lower_bound(inst, tol, certify)))
    attempt('thm3', lambda: _bare('thm3', sy_chain_bound(inst, tol, certify)))
    if 'mJq' in base:
        attempt('thm7', lambda: ratio_refined('thm7', thm7_lower_refinement(inst, tol, certify)))
        attempt('thm8', lambda: ratio_refined('thm8', thm8_merged_bound(inst.rearranged(), tol, certify)))
        if inst.n == 2:
            a, b, p1, q1 = _two_point_data(inst)
            attempt('thm9', lambda: ratio_refined('thm9', thm9_relabelled(inst.f, inst.phi, a, b, p1, q1, tol, certify)))
    else:
        for name in ('thm7', 'thm8', 'thm9'):
            skipped.setdefault(name, "pointwise ratios unavailable")
    if inst.n != 2:
        skipped.setdefault('thm9', "two-point refinement needs n = 2")

    ranked.sort(key=lambda entry: -entry.lower_bound)
    tightest: Tuple[str, ...] = ()
    if ranked:
        best = ranked[0].lower_bound
        tightest = tuple(e.name for e in ranked if best - e.lower_bound <= tol.bound(best))
    return TightnessRanking(gap=gap, ranked=tuple(ranked), tightest=tightest, skipped=skipped)


def _bare(name, terms) -> RankedBound:
    return RankedBound(name, terms.total, terms.total)
