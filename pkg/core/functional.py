# core/functional.py - weights, instances, rearrangement and the Jensen functional

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .catalog import FunctionSpec, Interval, ModulusSpec
from .conf import jensen_setting
from .exceptions import DomainError, InputError
from .tolerance import Tolerance, resolve

logger = logging.getLogger(__name__)

THM1 = 'thm1'
THM2 = 'thm2'
THM4 = 'thm4'
THM6 = 'thm6'
UNIFORM = 'uniform'

VALIDATION_MODES = (THM1, THM2, THM4, THM6, UNIFORM)


@dataclass(frozen=True)
class WeightVector:
    """
    Normalized weights. Construction accepts |sum - 1| <= WEIGHT_SUM_TOL and
    divides by the (order-independent) fsum so the stored entries sum to 1
    to rounding. Entries may be signed.
    """

    entries: Tuple[float, ...]
    normalized: bool = field(default=False, compare=False, repr=False)

    def __post_init__(self):
        values = tuple(float(v) for v in self.entries)
        if not values:
            raise InputError("weight vector is empty")
        if not all(math.isfinite(v) for v in values):
            raise InputError(f"weights must be finite, got {list(values)}")
        if not self.normalized:
            total = math.fsum(values)
            limit = jensen_setting('WEIGHT_SUM_TOL')
            if abs(total - 1.0) > limit:
                raise InputError(f"weights sum to {total:.12g}, expected 1 within {limit:g}")
            if total != 1.0:
                values = tuple(v / total for v in values)
        object.__setattr__(self, 'entries', values)
        object.__setattr__(self, 'normalized', True)

    @classmethod
    def uniform(cls, n: int) -> 'WeightVector':
        return cls(tuple([1.0 / n] * n))

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, index):
        return self.entries[index]

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.entries, dtype=float)

    @property
    def nonneg(self) -> bool:
        return all(v >= 0.0 for v in self.entries)

    @property
    def strictly_positive(self) -> bool:
        return all(v > 0.0 for v in self.entries)

    def permuted(self, order: Sequence[int]) -> 'WeightVector':
        return WeightVector(tuple(self.entries[i] for i in order), normalized=True)

    def prefix_sums(self) -> np.ndarray:
        return np.cumsum(self.array)

    def suffix_sums(self) -> np.ndarray:
        return np.cumsum(self.array[::-1])[::-1]


def as_weights(w) -> WeightVector:
    return w if isinstance(w, WeightVector) else WeightVector(tuple(w))


@dataclass(frozen=True)
class Rearrangement:
    """
    Increasing rearrangement: x_sorted[i] = x[permutation[i]], and the same
    permutation applied to both weight tuples.
    """

    permutation: Tuple[int, ...]
    x_sorted: Tuple[float, ...]
    p_bar: WeightVector
    q_bar: WeightVector

    @property
    def n(self) -> int:
        return len(self.x_sorted)

    def inverse(self) -> Tuple[Tuple[float, ...], WeightVector, WeightVector]:
        inverse = [0] * self.n
        for position, original in enumerate(self.permutation):
            inverse[original] = position
        x = tuple(self.x_sorted[i] for i in inverse)
        return x, self.p_bar.permuted(inverse), self.q_bar.permuted(inverse)


@dataclass(frozen=True)
class Instance:
    x: Tuple[float, ...]
    p: WeightVector
    q: WeightVector
    f: FunctionSpec
    interval: Interval
    phi: Optional[ModulusSpec] = None

    def __post_init__(self):
        object.__setattr__(self, 'x', tuple(float(v) for v in self.x))
        object.__setattr__(self, 'p', as_weights(self.p))
        object.__setattr__(self, 'q', as_weights(self.q))
        n = len(self.x)
        if n < 2:
            raise InputError(f"instances need n >= 2 points, got {n}")
        if len(self.p) != n or len(self.q) != n:
            raise InputError(f"length mismatch: len(x)={n}, len(p)={len(self.p)}, len(q)={len(self.q)}")
        if not self.interval.contains(self.x):
            raise DomainError(f"points {list(self.x)} leave the interval [{self.interval.a}, {self.interval.b}]")
        if not self.f.domain.covers(self.interval):
            raise DomainError(f"{self.f.label}: interval [{self.interval.a}, {self.interval.b}] leaves the domain")

    @classmethod
    def build(cls, x, p, q=None, f=None, interval=None, phi=None) -> 'Instance':
        """Convenience constructor: q defaults to uniform, interval to [min x, max x]."""
        x = tuple(float(v) for v in x)
        if q is None:
            q = WeightVector.uniform(len(x))
        if interval is None:
            interval = Interval(min(x), max(x))
        elif not isinstance(interval, Interval):
            interval = Interval(*interval)
        return cls(x=x, p=p, q=q, f=f, interval=interval, phi=phi)

    @property
    def n(self) -> int:
        return len(self.x)

    @property
    def x_array(self) -> np.ndarray:
        return np.asarray(self.x, dtype=float)

    @property
    def is_sorted(self) -> bool:
        return all(a <= b for a, b in zip(self.x, self.x[1:]))

    def rearrangement(self) -> Rearrangement:
        return increasing_rearrangement(self.x, self.p, self.q)

    def rearranged(self) -> 'Instance':
        r = self.rearrangement()
        return Instance(x=r.x_sorted, p=r.p_bar, q=r.q_bar, f=self.f, interval=self.interval, phi=self.phi)

    def with_weights(self, p=None, q=None) -> 'Instance':
        return Instance(
            x=self.x,
            p=self.p if p is None else p,
            q=self.q if q is None else q,
            f=self.f,
            interval=self.interval,
            phi=self.phi,
        )

    def with_modulus(self, phi: Optional[ModulusSpec]) -> 'Instance':
        return Instance(x=self.x, p=self.p, q=self.q, f=self.f, interval=self.interval, phi=phi)

    def as_dict(self) -> Dict:
        data = {
            'x': list(self.x),
            'p': list(self.p.entries),
            'q': list(self.q.entries),
            'f': self.f.as_dict(),
            'interval': self.interval.as_list(),
        }
        if self.phi is not None:
            data['phi'] = self.phi.as_dict()
        return data


def barycenter(x, w) -> float:
    points = np.asarray(x, dtype=float)
    weights = as_weights(w).array
    if points.shape != weights.shape:
        raise InputError(f"length mismatch: {points.size} points, {weights.size} weights")
    return float(np.dot(weights, points))


def jensen_functional(f: FunctionSpec, x, w) -> float:
    """J(f, x, w) = sum w_i f(x_i) - f(sum w_i x_i)."""
    weights = as_weights(w)
    center = barycenter(x, weights)
    if not f.domain.contains(center):
        raise DomainError(f"{f.label}: barycenter {center} outside the domain")
    return float(np.dot(weights.array, f.value(np.asarray(x, dtype=float))) - f.value(center))


def increasing_rearrangement(x, p, q) -> Rearrangement:
    points = np.asarray(x, dtype=float)
    p, q = as_weights(p), as_weights(q)
    if not (points.size == len(p) == len(q)):
        raise InputError(f"length mismatch: len(x)={points.size}, len(p)={len(p)}, len(q)={len(q)}")
    order = tuple(int(i) for i in np.argsort(points, kind='stable'))
    return Rearrangement(
        permutation=order,
        x_sorted=tuple(float(points[i]) for i in order),
        p_bar=p.permuted(order),
        q_bar=q.permuted(order),
    )


@dataclass(frozen=True)
class ValidationReport:
    mode: str
    violations: Tuple[str, ...]

    @property
    def admissible(self) -> bool:
        return not self.violations


def _prefix_violations(label: str, sums: np.ndarray, upto: int, slack: float) -> List[str]:
    found = []
    for i in range(upto):
        s = float(sums[i])
        if s < -slack or s > 1.0 + slack:
            found.append(f"prefix sum {s:.6g} of {label} at i={i + 1} not in [0,1]")
    return found


def validate_instance(inst: Instance, mode: str) -> ValidationReport:
    """Every violated hypothesis of the requested theorem mode; empty means admissible."""
    if mode not in VALIDATION_MODES:
        raise InputError(f"unknown validation mode '{mode}', expected one of {', '.join(VALIDATION_MODES)}")
    violations: List[str] = []
    slack = jensen_setting('PREFIX_TOL')

    if mode in (THM1, UNIFORM):
        for i, value in enumerate(inst.p.entries, start=1):
            if value < 0.0:
                violations.append(f"p_i >= 0 fails at i={i}")
        for i, value in enumerate(inst.q.entries, start=1):
            if not value > 0.0:
                violations.append(f"q_i > 0 fails at i={i}")
        if mode == UNIFORM and inst.phi is None:
            violations.append("modulus phi is required")

    if mode in (THM2, THM4, THM6):
        r = inst.rearrangement()
        violations.extend(_prefix_violations('p', r.p_bar.prefix_sums(), inst.n, slack))
        if mode == THM2:
            q_sums = r.q_bar.prefix_sums()
            for i in range(inst.n - 1):
                s = float(q_sums[i])
                if not 0.0 < s < 1.0:
                    violations.append(f"prefix sum {s:.6g} of q at i={i + 1} not in (0,1)")
        if mode == THM6 and not np.allclose(inst.q.array, 1.0 / inst.n, rtol=0.0, atol=slack):
            violations.append("q must be uniform")

    if violations:
        logger.debug(f"Instance inadmissible for {mode}: {violations}")
    return ValidationReport(mode=mode, violations=tuple(violations))


@dataclass(frozen=True)
class ConvexityCertificate:
    passed: bool
    worst_slack: float
    worst_at: float
    points: int


def certify_convexity(f: FunctionSpec, interval: Interval, points: int = 257,
                      tol: Optional[Tolerance] = None) -> ConvexityCertificate:
    """Second-order differences f(x-h) - 2f(x) + f(x+h) >= -tol on a uniform grid."""
    if points < 3:
        raise InputError(f"convexity grid needs at least 3 points, got {points}")
    tol = resolve(tol)
    grid = np.linspace(interval.a, interval.b, points)
    values = f.value(grid)
    second = np.diff(values, 2)
    worst = int(np.argmin(second))
    scale = float(np.max(np.abs(values)))
    passed = tol.admits(float(second[worst]), scale)
    return ConvexityCertificate(
        passed=passed,
        worst_slack=float(second[worst]),
        worst_at=float(grid[worst + 1]),
        points=points,
    )
