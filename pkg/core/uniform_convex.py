# core/uniform_convex.py - certification of power-type moduli and the refinements they give

import logging
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np

from .catalog import FunctionSpec, Interval, ModulusSpec
from .classic_bounds import ratio_extremes
from .conf import jensen_setting
from .exceptions import CertificationError, InputError, PreconditionError
from .functional import UNIFORM, Instance, WeightVector, barycenter, jensen_functional, validate_instance
from .tolerance import RefinementTerms, Term, Tolerance, resolve

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CertGrid:
    """Points per axis for the (x, y, t) certification grid; the t-grid always holds 0, 1/2 and 1."""

    x_points: int = 64
    y_points: int = 64
    t_points: int = 17

    def __post_init__(self):
        if min(self.x_points, self.y_points, self.t_points) < 3:
            raise InputError(f"grid counts must be >= 3, got {self.as_tuple()}")
        if self.t_points % 2 == 0:
            raise InputError(f"t-grid needs an odd count to contain 1/2, got {self.t_points}")

    @classmethod
    def default(cls) -> 'CertGrid':
        configured = jensen_setting('CERT_GRID')
        return cls(int(configured['X']), int(configured['Y']), int(configured['T']))

    def as_tuple(self) -> Tuple[int, int, int]:
        return (self.x_points, self.y_points, self.t_points)

    def axes(self, interval: Interval):
        return (
            np.linspace(interval.a, interval.b, self.x_points),
            np.linspace(interval.a, interval.b, self.y_points),
            np.linspace(0.0, 1.0, self.t_points),
        )


@dataclass(frozen=True)
class Certificate:
    kind: str
    passed: bool
    worst_slack: float
    worst_at: Tuple[float, ...]
    grid: Tuple[int, int, int]
    function: str
    modulus: str


def _chord_gaps(f: FunctionSpec, interval: Interval, grid: CertGrid):
    xs, ys, ts = grid.axes(interval)
    x = xs[:, None, None]
    y = ys[None, :, None]
    t = ts[None, None, :]
    chord = t * f.value(x) + (1.0 - t) * f.value(y)
    inner = f.value(np.clip(t * x + (1.0 - t) * y, interval.a, interval.b))
    weight = t * (1.0 - t)
    distance = np.abs(x - y)
    return chord, inner, weight, distance, (x, y, t)


def certify_uniform_convexity(f: FunctionSpec, phi: ModulusSpec, interval: Interval,
                              grid: Optional[CertGrid] = None,
                              tol: Optional[Tolerance] = None) -> Certificate:
    """Grid check of t f(x) + (1-t) f(y) >= f(tx + (1-t)y) + t(1-t) phi(|x-y|)."""
    grid = grid or CertGrid.default()
    tol = resolve(tol)
    chord, inner, weight, distance, (x, y, t) = _chord_gaps(f, interval, grid)
    rhs = inner + weight * phi.value(distance)
    slack = chord - rhs
    bound = tol.atol + tol.rtol * np.maximum(np.abs(chord), np.abs(rhs))
    passed = bool(np.all(slack >= -bound))
    i, j, k = np.unravel_index(int(np.argmin(slack)), slack.shape)
    worst_at = (float(x[i, 0, 0]), float(y[0, j, 0]), float(t[0, 0, k]))
    certificate = Certificate(
        kind='uniform_convexity',
        passed=passed,
        worst_slack=float(slack[i, j, k]),
        worst_at=worst_at,
        grid=grid.as_tuple(),
        function=f.label,
        modulus=phi.label,
    )
    logger.info(f"Certificate {f.label} / {phi.label}: passed={passed}, worst={certificate.worst_slack:.3e}")
    return certificate


def estimate_modulus_coefficient(f: FunctionSpec, exponent: float, interval: Interval,
                                 grid: Optional[CertGrid] = None) -> float:
    """Infimum over grid cells with x != y, 0 < t < 1 of the chord gap / (t(1-t)|x-y|^r)."""
    if not exponent >= 2:
        raise InputError(f"modulus exponent must be >= 2, got {exponent}")
    grid = grid or CertGrid.default()
    chord, inner, weight, distance, _ = _chord_gaps(f, interval, grid)
    mask = np.broadcast_to((distance > 0.0) & (weight > 0.0), chord.shape)
    if not mask.any():
        raise InputError("grid has no cells with x != y and 0 < t < 1")
    denominator = np.broadcast_to(weight * np.power(distance, exponent), chord.shape)
    ratios = (chord - inner)[mask] / denominator[mask]
    return float(ratios.min())


def gradient_inequality_check(f: FunctionSpec, phi: ModulusSpec, interval: Interval,
                              grid: Optional[CertGrid] = None,
                              tol: Optional[Tolerance] = None) -> Certificate:
    """Grid check of f(y) - f(x) >= f'(x)(y - x) + phi(|y - x|) at interior x."""
    grid = grid or CertGrid.default()
    tol = resolve(tol)
    xs, ys, _ = grid.axes(interval)
    xs = xs[(xs > f.domain.lo) & (xs < f.domain.hi)]
    if xs.size == 0:
        raise InputError("no interior grid points to take derivatives at")
    x = xs[:, None]
    y = ys[None, :]
    lhs = f.value(y) - f.value(x)
    rhs = f.derivative(x) * (y - x) + phi.value(np.abs(y - x))
    slack = lhs - rhs
    bound = tol.atol + tol.rtol * np.maximum(np.abs(lhs), np.abs(rhs))
    i, j = np.unravel_index(int(np.argmin(slack)), slack.shape)
    return Certificate(
        kind='gradient',
        passed=bool(np.all(slack >= -bound)),
        worst_slack=float(slack[i, j]),
        worst_at=(float(xs[i]), float(ys[j])),
        grid=grid.as_tuple(),
        function=f.label,
        modulus=phi.label,
    )


def _checked_modulus(phi: Optional[ModulusSpec], interval: Interval) -> ModulusSpec:
    """Phi must be present, vanish at 0 and be nondecreasing on [0, b - a]."""
    if phi is None:
        raise PreconditionError("a modulus phi is required", ["phi missing"])
    try:
        phi.assert_monotone(interval.length)
    except InputError as exc:
        raise PreconditionError("modulus is not monotone", [str(exc)]) from exc
    return phi


@lru_cache(maxsize=256)
def _cached_certificate(f, phi, interval, grid, tol):
    return certify_uniform_convexity(f, phi, interval, grid, tol)


def require_certified(f: FunctionSpec, phi: Optional[ModulusSpec], interval: Interval,
                      tol: Optional[Tolerance] = None) -> ModulusSpec:
    """Refuse (f, phi) pairs that fail certification on the default grid."""
    _checked_modulus(phi, interval)
    certificate = _cached_certificate(f, phi, interval, CertGrid.default(), resolve(tol))
    if not certificate.passed:
        logger.warning(f"Refusing uncertified pair {f.label} / {phi.label}: worst slack {certificate.worst_slack:.3e}")
        raise CertificationError(
            "modulus not certified for this function",
            [f"{phi.label} fails for {f.label} on [{interval.a}, {interval.b}] "
             f"at {certificate.worst_at} (slack {certificate.worst_slack:.3e})"],
        )
    return phi


def _nonneg_p(inst: Instance) -> None:
    bad = [f"p_i >= 0 fails at i={i}" for i, v in enumerate(inst.p.entries, start=1) if v < 0.0]
    if bad:
        raise PreconditionError("refinement needs nonneg p", bad)


def _ratio_ready(inst: Instance) -> None:
    report = validate_instance(inst, UNIFORM)
    if not report.admissible:
        raise PreconditionError("instance inadmissible for the ratio refinements", report.violations)


def eq32_lower_bound(inst: Instance, tol: Optional[Tolerance] = None, certify: bool = True) -> RefinementTerms:
    """J(f,x,p) >= sum p_i phi(|x_i - xbar_p|)."""
    _nonneg_p(inst)
    phi = require_certified(inst.f, inst.phi, inst.interval, tol) if certify else _need_phi(inst)
    x = inst.x_array
    center = barycenter(x, inst.p)
    spread = float(np.dot(inst.p.array, phi.value(np.abs(x - center))))
    return RefinementTerms(
        theorem='eq32',
        gap=Term('J(p)', jensen_functional(inst.f, x, inst.p)),
        terms=(Term('sum p_i*phi(|x_i-xp|)', spread),),
        tolerance=resolve(tol),
        extras={'xbar_p': center},
    )


def _need_phi(inst: Instance) -> ModulusSpec:
    return _checked_modulus(inst.phi, inst.interval)


def _adjacent_links(y: np.ndarray, d: np.ndarray, phi: ModulusSpec):
    steps = np.diff(y)
    values = d[:-1] * d[1:] * phi.value(steps)
    return tuple(
        Term(f"d{i + 1}*d{i + 2}*phi(y{i + 2}-y{i + 1})", float(v))
        for i, v in enumerate(values)
    )


def sy_chain_bound(inst: Instance, tol: Optional[Tolerance] = None, certify: bool = True) -> RefinementTerms:
    """J(f,x,p) >= sum over neighbours in sorted order of p_(k) p_(k+1) phi(x_(k+1) - x_(k))."""
    _nonneg_p(inst)
    phi = require_certified(inst.f, inst.phi, inst.interval, tol) if certify else _need_phi(inst)
    r = inst.rearrangement()
    terms = _adjacent_links(np.asarray(r.x_sorted), r.p_bar.array, phi)
    return RefinementTerms(
        theorem='thm3',
        gap=Term('J(p)', jensen_functional(inst.f, inst.x, inst.p)),
        terms=terms,
        tolerance=resolve(tol),
        extras={'permutation': list(r.permutation)},
    )


def thm7_lower_refinement(inst: Instance, tol: Optional[Tolerance] = None,
                          certify: bool = True) -> RefinementTerms:
    """
    J(p) - m J(q) >= m phi(|xbar_q - xbar_p|) + sum (p_i - m q_i) phi(|x_i - xbar_p|).
    Only differences of points enter, so any interval works.
    """
    _ratio_ready(inst)
    phi = require_certified(inst.f, inst.phi, inst.interval, tol) if certify else _need_phi(inst)
    m = ratio_extremes(inst.p, inst.q).m
    x = inst.x_array
    xp = barycenter(x, inst.p)
    xq = barycenter(x, inst.q)
    weights = inst.p.array - m * inst.q.array
    gap = jensen_functional(inst.f, x, inst.p) - m * jensen_functional(inst.f, x, inst.q)
    return RefinementTerms(
        theorem='thm7_lower',
        gap=Term('J(p)-m*J(q)', gap),
        terms=(
            Term('m*phi(|xq-xp|)', m * phi.value(abs(xq - xp))),
            Term('sum (p_i-m*q_i)*phi(|x_i-xp|)', float(np.dot(weights, phi.value(np.abs(x - xp))))),
        ),
        tolerance=resolve(tol),
        extras={'m': m, 'xbar_p': xp, 'xbar_q': xq},
    )


def thm7_upper_refinement(inst: Instance, tol: Optional[Tolerance] = None, certify: bool = True,
                          normalized: bool = False) -> RefinementTerms:
    """
    M J(q) - J(p) >= sum (M q_i - p_i) phi(|x_i - xbar_q|) + phi(|xbar_q - xbar_p|).

    Computed as the convex-combination chain with weights q_i - p_i/M and 1/M
    (gap J(q) - J(p)/M), then multiplied by M unless normalized=True.
    """
    _ratio_ready(inst)
    phi = require_certified(inst.f, inst.phi, inst.interval, tol) if certify else _need_phi(inst)
    M = ratio_extremes(inst.p, inst.q).M
    x = inst.x_array
    xp = barycenter(x, inst.p)
    xq = barycenter(x, inst.q)
    weights = inst.q.array - inst.p.array / M
    j_p = jensen_functional(inst.f, x, inst.p)
    j_q = jensen_functional(inst.f, x, inst.q)

    norm_gap = j_q - j_p / M
    norm_spread = float(np.dot(weights, phi.value(np.abs(x - xq))))
    norm_shift = phi.value(abs(xq - xp)) / M
    extras = {
        'M': M,
        'xbar_p': xp,
        'xbar_q': xq,
        'normalized_gap': norm_gap,
        'normalized_total': norm_spread + norm_shift,
        'normalized_slack': norm_gap - (norm_spread + norm_shift),
    }
    if normalized:
        return RefinementTerms(
            theorem='thm7_upper_normalized',
            gap=Term('J(q)-J(p)/M', norm_gap),
            terms=(
                Term('sum (q_i-p_i/M)*phi(|x_i-xq|)', norm_spread),
                Term('phi(|xq-xp|)/M', norm_shift),
            ),
            tolerance=resolve(tol),
            extras=extras,
        )
    return RefinementTerms(
        theorem='thm7_upper',
        gap=Term('M*J(q)-J(p)', M * j_q - j_p),
        terms=(
            Term('sum (M*q_i-p_i)*phi(|x_i-xq|)', M * norm_spread),
            Term('phi(|xq-xp|)', M * norm_shift),
        ),
        tolerance=resolve(tol),
        extras=extras,
    )


@dataclass(frozen=True)
class TwoPointSpecials:
    lower: RefinementTerms
    upper: RefinementTerms
    lower_half: RefinementTerms
    upper_half: RefinementTerms
    swapped: bool
    swapped_half: bool


def thm7_n2_specials(f: FunctionSpec, phi: ModulusSpec, x1: float, x2: float, p1: float, q1: float,
                     tol: Optional[Tolerance] = None, certify: bool = True) -> TwoPointSpecials:
    """
    The two-point forms of the lower/upper refinements, for general q and for q = (1/2, 1/2).
    Points are relabelled so that p1/q1 <= p2/q2 (and p1 <= p2 for the half-q pair).
    """
    tol = resolve(tol)
    if not 0.0 <= p1 <= 1.0 or not 0.0 < q1 < 1.0:
        raise PreconditionError("two-point refinement needs 0 <= p1 <= 1 and 0 < q1 < 1", [f"p1={p1}, q1={q1}"])
    interval = Interval(min(x1, x2), max(x1, x2))
    if certify:
        require_certified(f, phi, interval, tol)
    else:
        _checked_modulus(phi, interval)

    def jensen2(a, b, w):
        return jensen_functional(f, (a, b), WeightVector((w, 1.0 - w)))

    swapped = p1 / q1 > (1.0 - p1) / (1.0 - q1)
    if swapped:
        logger.debug("Two-point specials: relabelling points so that p1/q1 <= p2/q2")
        a, b, s, u = x2, x1, 1.0 - p1, 1.0 - q1
    else:
        a, b, s, u = x1, x2, p1, q1
    m = s / u
    M = (1.0 - s) / (1.0 - u)
    xp = s * a + (1.0 - s) * b
    xq = u * a + (1.0 - u) * b
    shift = abs(xq - xp)
    notes = ("points relabelled so that p1/q1 <= p2/q2",) if swapped else ()
    lower = RefinementTerms(
        theorem='thm7_lower_n2',
        gap=Term('J(p)-m*J(q)', jensen2(a, b, s) - m * jensen2(a, b, u)),
        terms=(
            Term('m*phi(|xq-xp|)', m * phi.value(shift)),
            Term('(1-m)*phi(p1|x2-x1|)', (1.0 - m) * phi.value(s * abs(b - a))),
        ),
        tolerance=tol,
        notes=notes,
        extras={'m': m, 'x1': a, 'x2': b, 'p1': s, 'q1': u},
    )
    upper = RefinementTerms(
        theorem='thm7_upper_n2',
        gap=Term('M*J(q)-J(p)', M * jensen2(a, b, u) - jensen2(a, b, s)),
        terms=(
            Term('(M*q1-p1)*phi(q2|x2-x1|)', (M * u - s) * phi.value((1.0 - u) * abs(b - a))),
            Term('phi(|xq-xp|)', phi.value(shift)),
        ),
        tolerance=tol,
        notes=notes,
        extras={'M': M, 'x1': a, 'x2': b, 'p1': s, 'q1': u},
    )

    swapped_half = p1 > 0.5
    half_notes = ("points relabelled so that p1 <= 1/2",) if swapped_half else ()
    if swapped_half:
        a, b, s = x2, x1, 1.0 - p1
    else:
        a, b, s = x1, x2, p1
    mid = 0.5 * (a + b)
    hh = 0.5 * (f.value(a) + f.value(b)) - f.value(mid)
    xp = s * a + (1.0 - s) * b
    j_p = jensen2(a, b, s)
    lower_half = RefinementTerms(
        theorem='thm7_lower_half',
        gap=Term('J(p)-2p1*HH', j_p - 2.0 * s * hh),
        terms=(
            Term('2p1*phi(|mid-xp|)', 2.0 * s * phi.value(abs(mid - xp))),
            Term('(1-2p1)*phi(p1|x2-x1|)', (1.0 - 2.0 * s) * phi.value(s * abs(b - a))),
        ),
        tolerance=tol,
        notes=half_notes,
        extras={'HH': hh, 'x1': a, 'x2': b, 'p1': s},
    )
    upper_half = RefinementTerms(
        theorem='thm7_upper_half',
        gap=Term('2p2*HH-J(p)', 2.0 * (1.0 - s) * hh - j_p),
        terms=(
            Term('(p2-p1)*phi(|x2-x1|/2)', (1.0 - 2.0 * s) * phi.value(0.5 * abs(b - a))),
            Term('phi(|mid-xp|)', phi.value(abs(mid - xp))),
        ),
        tolerance=tol,
        notes=half_notes,
        extras={'HH': hh, 'x1': a, 'x2': b, 'p1': s},
    )
    return TwoPointSpecials(lower, upper, lower_half, upper_half, swapped, swapped_half)


def thm8_merged_bound(inst: Instance, tol: Optional[Tolerance] = None, certify: bool = True) -> RefinementTerms:
    """
    J(p) - m J(q) >= sum_i d_i d_{i+1} phi(y_{i+1} - y_i), where y is x with xbar_q
    inserted in sorted position k (before any tie) and d is p - m q with m at k.
    """
    _ratio_ready(inst)
    if not inst.is_sorted:
        raise PreconditionError("merged bound needs x sorted increasingly", ["rearrange the instance first"])
    phi = require_certified(inst.f, inst.phi, inst.interval, tol) if certify else _need_phi(inst)

    m = ratio_extremes(inst.p, inst.q).m
    x = inst.x_array
    xq = barycenter(x, inst.q)
    k = int(np.searchsorted(x, xq, side='left'))
    residual = inst.p.array - m * inst.q.array
    y = np.concatenate([x[:k], [xq], x[k:]])
    d = np.concatenate([residual[:k], [m], residual[k:]])
    gap = jensen_functional(inst.f, x, inst.p) - m * jensen_functional(inst.f, x, inst.q)
    return RefinementTerms(
        theorem='thm8',
        gap=Term('J(p)-m*J(q)', gap),
        terms=_adjacent_links(y, d, phi),
        tolerance=resolve(tol),
        extras={
            'm': m,
            'k': k,
            'y': [float(v) for v in y],
            'd': [float(v) for v in d],
            'sum_d': float(np.sum(d)),
        },
    )


def thm9_two_point(f: FunctionSpec, phi: ModulusSpec, a: float, b: float, p1: float, q1: float,
                   tol: Optional[Tolerance] = None, certify: bool = True) -> RefinementTerms:
    """
    [p1 f(a) + p2 f(b) - f(p1 a + p2 b)] - m [q1 f(a) + q2 f(b) - f(q1 a + q2 b)]
    >= m (1 - m) phi(q1 |b - a|), with m = p1/q1 <= p2/q2. The points may come in either order.
    """
    interval = Interval(min(a, b), max(a, b))
    span = abs(b - a)
    p2, q2 = 1.0 - p1, 1.0 - q1
    problems = []
    if not 0.0 <= p1 <= 1.0:
        problems.append(f"p1 = {p1} not in [0,1]")
    if not 0.0 < q1 < 1.0:
        problems.append(f"q1 = {q1} not in (0,1)")
    if not problems and p1 / q1 > p2 / q2:
        problems.append(f"p1/q1 = {p1 / q1:.6g} exceeds p2/q2 = {p2 / q2:.6g}")
    if problems:
        raise PreconditionError("two-point uniform-convexity bound inadmissible", problems)
    if certify:
        require_certified(f, phi, interval, tol)
    else:
        _checked_modulus(phi, interval)

    m = p1 / q1
    gap = (jensen_functional(f, (a, b), WeightVector((p1, p2)))
           - m * jensen_functional(f, (a, b), WeightVector((q1, q2))))
    extras = {'m': m}
    if q1 == 0.5:
        extras.update({
            'half_q_term': 2.0 * p1 * (1.0 - 2.0 * p1) * phi.value(0.5 * span),
            'best_term': 0.25 * phi.value(0.5 * span),
            'best_p1': 0.25,
            'at_best_p1': p1 == 0.25,
        })
    return RefinementTerms(
        theorem='thm9',
        gap=Term('J(p)-m*J(q)', gap),
        terms=(Term('m(1-m)*phi(q1|b-a|)', m * (1.0 - m) * phi.value(q1 * span)),),
        tolerance=resolve(tol),
        extras=extras,
    )


def thm9_relabelled(f: FunctionSpec, phi: ModulusSpec, x1: float, x2: float, p1: float, q1: float,
                    tol: Optional[Tolerance] = None, certify: bool = True) -> RefinementTerms:
    """thm9_two_point after relabelling (x1, x2, p1, q1) -> (x2, x1, p2, q2) when p1/q1 > p2/q2."""
    if 0.0 < q1 < 1.0 and p1 / q1 > (1.0 - p1) / (1.0 - q1):
        logger.debug("Two-point refinement: relabelling points so that p1/q1 <= p2/q2")
        terms = thm9_two_point(f, phi, x2, x1, 1.0 - p1, 1.0 - q1, tol, certify)
        return replace(terms, notes=terms.notes + ("points relabelled so that p1/q1 <= p2/q2",))
    return thm9_two_point(f, phi, x1, x2, p1, q1, tol, certify)


def thm9_coefficient_scan(step: float = 1e-4) -> Tuple[float, float]:
    """Maximize 2 p1 (1 - 2 p1) over p1 in (0, 1/2] on a grid; returns (argmax, max)."""
    count = int(round(0.5 / step))
    p1 = np.arange(1, count + 1) * step
    values = 2.0 * p1 * (1.0 - 2.0 * p1)
    best = int(np.argmax(values))
    return float(p1[best]), float(values[best])


@dataclass(frozen=True)
class ComparatorReport:
    p1: float
    rhs_pointwise: float
    rhs_two_point: float
    rhs_two_point_best: float
    stronger: str
    phi_over_square_increasing: bool


def refinement_comparator_n2(f: FunctionSpec, phi: ModulusSpec, a: float, b: float, p1: float,
                             tol: Optional[Tolerance] = None) -> ComparatorReport:
    """
    With q = (1/2, 1/2), compare the gradient-based right-hand side
    2p1 phi(|mid - xbar_p|) + (1 - 2p1) phi(p1 (b - a)) with the chord-based
    2p1 (1 - 2p1) phi((b - a)/2); both bound J(p) - 2p1 HH from below.
    """
    tol = resolve(tol)
    Interval(a, b)  # a < b
    if not 0.0 < p1 <= 0.5:
        raise PreconditionError("comparator needs 0 < p1 <= 1/2", [f"p1 = {p1}"])
    mid = 0.5 * (a + b)
    xp = p1 * a + (1.0 - p1) * b
    pointwise = 2.0 * p1 * phi.value(abs(mid - xp)) + (1.0 - 2.0 * p1) * phi.value(p1 * (b - a))
    two_point = 2.0 * p1 * (1.0 - 2.0 * p1) * phi.value(0.5 * (b - a))
    margin = tol.bound(max(pointwise, two_point))
    if abs(pointwise - two_point) <= margin:
        stronger = 'tie'
    elif two_point > pointwise:
        stronger = 'two_point'
    else:
        stronger = 'pointwise'
    return ComparatorReport(
        p1=p1,
        rhs_pointwise=pointwise,
        rhs_two_point=two_point,
        rhs_two_point_best=0.25 * phi.value(0.5 * (b - a)),
        stronger=stronger,
        phi_over_square_increasing=phi.exponent > 2.0,
    )
