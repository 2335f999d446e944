# core/refined_bounds.py - prefix/suffix-ratio sandwich and its corollaries

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .catalog import FunctionSpec, Interval
from .classic_bounds import ratio_extremes
from .conf import jensen_setting
from .exceptions import JensenError, PreconditionError
from .functional import (
    THM2,
    THM4,
    THM6,
    Instance,
    Rearrangement,
    WeightVector,
    as_weights,
    jensen_functional,
    validate_instance,
)
from .tolerance import BoundReport, Term, Tolerance, resolve

logger = logging.getLogger(__name__)

PREFIX = 'prefix'
SUFFIX = 'suffix'


@dataclass(frozen=True)
class RatioSummary:
    """
    prefix[i] = sum_{j<=i} p_bar_j / sum_{j<=i} q_bar_j and
    suffix[i] = sum_{j>=i} p_bar_j / sum_{j>=i} q_bar_j (0-based), with the
    extremes m_star/M_star over both families and where they are attained.
    """

    prefix: Tuple[float, ...]
    suffix: Tuple[float, ...]
    m_star: float
    M_star: float
    m_star_at: Tuple[Tuple[str, int], ...]
    M_star_at: Tuple[Tuple[str, int], ...]


def _attained(prefix: np.ndarray, suffix: np.ndarray, value: float):
    found = [(PREFIX, int(i)) for i in np.flatnonzero(prefix == value)]
    found.extend((SUFFIX, int(i)) for i in np.flatnonzero(suffix == value))
    return tuple(found)


def prefix_suffix_ratios(r: Rearrangement) -> RatioSummary:
    n = r.n
    slack = jensen_setting('PREFIX_TOL')
    p_prefix = r.p_bar.prefix_sums()
    q_prefix = r.q_bar.prefix_sums()

    problems = []
    for i in range(n - 1):
        if not 0.0 < q_prefix[i] < 1.0:
            problems.append(f"prefix sum {q_prefix[i]:.6g} of q at i={i + 1} not in (0,1)")
    for i in range(n):
        if p_prefix[i] < -slack or p_prefix[i] > 1.0 + slack:
            problems.append(f"prefix sum {p_prefix[i]:.6g} of p at i={i + 1} not in [0,1]")
    if problems:
        raise PreconditionError("prefix/suffix ratios need admissible prefix sums", problems)

    p_suffix = r.p_bar.suffix_sums()
    q_suffix = r.q_bar.suffix_sums()

    prefix = np.empty(n)
    suffix = np.empty(n)
    prefix[:-1] = p_prefix[:-1] / q_prefix[:-1]
    prefix[-1] = 1.0  # total over total
    suffix[0] = 1.0
    suffix[1:] = p_suffix[1:] / q_suffix[1:]

    m_star = float(min(prefix.min(), suffix.min()))
    M_star = float(max(prefix.max(), suffix.max()))
    summary = RatioSummary(
        prefix=tuple(float(v) for v in prefix),
        suffix=tuple(float(v) for v in suffix),
        m_star=m_star,
        M_star=M_star,
        m_star_at=_attained(prefix, suffix, m_star),
        M_star_at=_attained(prefix, suffix, M_star),
    )
    _check_summary(summary, r)
    return summary


def _check_summary(summary: RatioSummary, r: Rearrangement) -> None:
    if summary.prefix[-1] != 1.0 or summary.suffix[0] != 1.0:
        raise JensenError("ratio summary must end/start at exactly 1")
    if not summary.m_star <= 1.0 <= summary.M_star:
        raise JensenError(f"ratio summary needs m* <= 1 <= M*, got {summary.m_star}, {summary.M_star}")
    if r.q_bar.strictly_positive:
        pointwise = ratio_extremes(r.p_bar, r.q_bar)
        slack = 1e-12 * max(1.0, abs(pointwise.M))
        if summary.m_star < pointwise.m - slack or summary.M_star > pointwise.M + slack:
            raise JensenError(
                f"ratio summary escapes [m, M]: m={pointwise.m}, m*={summary.m_star}, "
                f"M*={summary.M_star}, M={pointwise.M}"
            )


def theorem2_bounds(inst: Instance, tol: Optional[Tolerance] = None) -> BoundReport:
    """M* J(f,x,q) >= J(f,x,p) >= m* J(f,x,q); p may be signed if its sorted prefix sums stay in [0,1]."""
    report = validate_instance(inst, THM2)
    if not report.admissible:
        raise PreconditionError("instance inadmissible for theorem 2", report.violations)
    summary = prefix_suffix_ratios(inst.rearrangement())
    j_p = jensen_functional(inst.f, inst.x, inst.p)
    j_q = jensen_functional(inst.f, inst.x, inst.q)
    notes = ()
    if inst.p == inst.q:
        notes = ("p = q: the sandwich assumes p != q; every term equals J(q)",)
    return BoundReport(
        theorem='thm2',
        terms=(
            Term('M_star*J(q)', summary.M_star * j_q),
            Term('J(p)', j_p),
            Term('m_star*J(q)', summary.m_star * j_q),
        ),
        tolerance=resolve(tol),
        notes=notes,
        extras={'m_star': summary.m_star, 'M_star': summary.M_star, 'J(q)': j_q},
    )


@dataclass(frozen=True)
class RefinementCheck:
    m: float
    m_star: float
    M_star: float
    M: float
    refined_below: bool
    refined_above: bool
    min_interior_only: bool
    max_interior_only: bool


def remark1_refinement(inst: Instance, tol: Optional[Tolerance] = None) -> RefinementCheck:
    """Compare (m, M) with (m*, M*) and report where the pointwise extremes sit in sorted order."""
    tol = resolve(tol)
    r = inst.rearrangement()
    pointwise = ratio_extremes(r.p_bar, r.q_bar)
    summary = prefix_suffix_ratios(r)
    margin = tol.bound(max(abs(pointwise.m), abs(pointwise.M)))
    endpoints = {0, r.n - 1}
    return RefinementCheck(
        m=pointwise.m,
        m_star=summary.m_star,
        M_star=summary.M_star,
        M=pointwise.M,
        refined_below=summary.m_star > pointwise.m + margin,
        refined_above=summary.M_star < pointwise.M - margin,
        min_interior_only=not endpoints.intersection(pointwise.argmin),
        max_interior_only=not endpoints.intersection(pointwise.argmax),
    )


def theorem4_endpoint_bound(f: FunctionSpec, a: float, b: float, x, p,
                            tol: Optional[Tolerance] = None) -> BoundReport:
    """
    0 <= J(f,x,p) <= M* [(f(a)+f(b))/2 - f((a+b)/2)], with M* taken from the
    configuration extended by a (weight p=0, q=1/2) in front and b (p=0, q=1/2) behind.
    """
    interval = Interval(a, b)
    p = as_weights(p)
    points = tuple(float(v) for v in x)
    outside = [f"x_{i}={v} outside [{a}, {b}]" for i, v in enumerate(points, start=1) if not a <= v <= b]
    if outside:
        raise PreconditionError("endpoint bound needs every point inside [a, b]", outside)
    if not f.domain.covers(interval):
        raise PreconditionError("endpoints outside the domain", [f"[{a}, {b}] not in domain of {f.label}"])

    inst = Instance(x=points, p=p, q=WeightVector.uniform(len(points)), f=f, interval=interval)
    report = validate_instance(inst, THM4)
    if not report.admissible:
        raise PreconditionError("instance inadmissible for the endpoint bound", report.violations)
    r = inst.rearrangement()
    n = r.n
    extended = Rearrangement(
        permutation=tuple(range(n + 2)),
        x_sorted=(interval.a,) + r.x_sorted + (interval.b,),
        p_bar=WeightVector((0.0,) + r.p_bar.entries + (0.0,), normalized=True),
        q_bar=WeightVector((0.5,) + (0.0,) * n + (0.5,), normalized=True),
    )
    summary = prefix_suffix_ratios(extended)

    gap = jensen_functional(f, points, p)
    hh = 0.5 * (f.value(a) + f.value(b)) - f.value(0.5 * (a + b))
    below_two = summary.M_star < 2.0
    notes = [f"extended M* = {summary.M_star!r}; the older bound uses 2"]
    if p.nonneg and not below_two:
        notes.append("strict M* < 2 not observed for nonneg p")
        logger.debug(f"Endpoint bound: M* = {summary.M_star} for nonneg p")
    return BoundReport(
        theorem='thm4',
        terms=(
            Term('M_star*HH', summary.M_star * hh),
            Term('J(p)', gap),
            Term('zero', 0.0),
        ),
        tolerance=resolve(tol),
        notes=tuple(notes),
        extras={
            'M_star': summary.M_star,
            'HH': hh,
            '2*HH': 2.0 * hh,
            'M_star_below_2': below_two,
        },
    )


def theorem6_uniform_q_bounds(f: FunctionSpec, x, p, tol: Optional[Tolerance] = None) -> BoundReport:
    """
    m* J(unif) <= J(f,x,p) <= M* J(unif) with q uniform; for nonneg p the chain
    extends outward to n min p_i J(unif) and n max p_i J(unif).
    """
    p = as_weights(p)
    points = tuple(float(v) for v in x)
    n = len(points)
    uniform = WeightVector.uniform(n)
    inst = Instance.build(points, p, uniform, f=f)
    report = validate_instance(inst, THM6)
    if not report.admissible:
        raise PreconditionError("instance inadmissible for the uniform-q bounds", report.violations)
    r = inst.rearrangement()
    summary = prefix_suffix_ratios(r)

    j_u = jensen_functional(f, points, uniform)
    j_p = jensen_functional(f, points, p)
    terms = [
        Term('M_star*J(unif)', summary.M_star * j_u),
        Term('J(p)', j_p),
        Term('m_star*J(unif)', summary.m_star * j_u),
    ]
    extras = {'m_star': summary.m_star, 'M_star': summary.M_star, 'J(unif)': j_u}
    notes = []
    if p.nonneg:
        low, high = n * min(p.entries), n * max(p.entries)
        terms.insert(0, Term('n*max(p)*J(unif)', high * j_u))
        terms.append(Term('n*min(p)*J(unif)', low * j_u))
        pointwise = ratio_extremes(r.p_bar, r.q_bar)
        endpoints = {0, n - 1}
        extras.update({
            'n*min(p)': low,
            'n*max(p)': high,
            'M_star_strict': summary.M_star < high,
            'm_star_strict': summary.m_star > low,
        })
        if endpoints.intersection(pointwise.argmax):
            notes.append("max p_i sits at an end of the sorted order: M* may equal n*max(p)")
        if endpoints.intersection(pointwise.argmin):
            notes.append("min p_i sits at an end of the sorted order: m* may equal n*min(p)")
    return BoundReport(
        theorem='thm6',
        terms=tuple(terms),
        tolerance=resolve(tol),
        notes=tuple(notes),
        extras=extras,
    )
