# core/classic_bounds.py - the pointwise-ratio sandwich and its two-point form

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .catalog import FunctionSpec, Interval
from .exceptions import PreconditionError
from .functional import THM1, Instance, WeightVector, as_weights, jensen_functional, validate_instance
from .tolerance import BoundReport, Term, Tolerance, resolve

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ClassicRatios:
    """m = min p_i/q_i and M = max p_i/q_i with every (0-based) attaining index."""

    m: float
    M: float
    argmin: Tuple[int, ...]
    argmax: Tuple[int, ...]
    ratios: Tuple[float, ...]


def ratio_extremes(p, q) -> ClassicRatios:
    p, q = as_weights(p), as_weights(q)
    if len(p) != len(q):
        raise PreconditionError("length mismatch", [f"len(p)={len(p)}, len(q)={len(q)}"])
    bad = [f"q_i > 0 fails at i={i}" for i, v in enumerate(q.entries, start=1) if not v > 0.0]
    if bad:
        raise PreconditionError("pointwise ratios need q strictly positive", bad)
    ratios = p.array / q.array
    m = float(ratios.min())
    M = float(ratios.max())
    return ClassicRatios(
        m=m,
        M=M,
        argmin=tuple(int(i) for i in np.flatnonzero(ratios == m)),
        argmax=tuple(int(i) for i in np.flatnonzero(ratios == M)),
        ratios=tuple(float(r) for r in ratios),
    )


def theorem1_bounds(inst: Instance, tol: Optional[Tolerance] = None) -> BoundReport:
    """M*J(f,x,q) >= J(f,x,p) >= m*J(f,x,q) for nonneg p and positive q."""
    report = validate_instance(inst, THM1)
    if not report.admissible:
        raise PreconditionError("instance inadmissible for theorem 1", report.violations)
    ratios = ratio_extremes(inst.p, inst.q)
    j_p = jensen_functional(inst.f, inst.x, inst.p)
    j_q = jensen_functional(inst.f, inst.x, inst.q)
    notes = ()
    if inst.p == inst.q:
        notes = ("p = q: m = M = 1 and the chain collapses to equalities",)
    return BoundReport(
        theorem='thm1',
        terms=(
            Term('M*J(q)', ratios.M * j_q),
            Term('J(p)', j_p),
            Term('m*J(q)', ratios.m * j_q),
        ),
        tolerance=resolve(tol),
        notes=notes,
        extras={'m': ratios.m, 'M': ratios.M, 'J(q)': j_q},
    )


def two_point_bounds(f: FunctionSpec, a: float, b: float, p: float,
                     tol: Optional[Tolerance] = None) -> BoundReport:
    """
    min{p,q}[f(a)+f(b)-2f((a+b)/2)] <= p f(a) + q f(b) - f(pa+qb)
    <= max{p,q}[f(a)+f(b)-2f((a+b)/2)], q = 1 - p.
    """
    interval = Interval(a, b)
    if not 0.0 < p < 1.0:
        raise PreconditionError("two-point bound needs 0 < p < 1", [f"p = {p}"])
    if not f.domain.covers(interval):
        raise PreconditionError("endpoints outside the domain", [f"[{a}, {b}] not in domain of {f.label}"])
    q = 1.0 - p
    weights = WeightVector((p, q))
    middle = jensen_functional(f, (a, b), weights)
    bracket = f.value(a) + f.value(b) - 2.0 * f.value(0.5 * (a + b))
    return BoundReport(
        theorem='thm5',
        terms=(
            Term('max{p,q}*bracket', max(p, q) * bracket),
            Term('J(p)', middle),
            Term('min{p,q}*bracket', min(p, q) * bracket),
        ),
        tolerance=resolve(tol),
        extras={'bracket': bracket, 'p': p, 'q': q},
    )
