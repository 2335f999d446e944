# core/tolerance.py - slack/tolerance framework shared by every bound and refinement

from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple

from .conf import jensen_setting

VERIFIED = 'verified'
VIOLATED = 'violated'
INADMISSIBLE = 'inadmissible'


@dataclass(frozen=True)
class Tolerance:
    """Slack acceptance: slack >= -(atol + rtol * scale)."""

    atol: float = 1e-10
    rtol: float = 1e-9

    @classmethod
    def default(cls) -> 'Tolerance':
        configured = jensen_setting('TOLERANCE')
        return cls(atol=float(configured['ATOL']), rtol=float(configured['RTOL']))

    def bound(self, scale: float) -> float:
        return self.atol + self.rtol * abs(scale)

    def admits(self, slack: float, scale: float) -> bool:
        return slack >= -self.bound(scale)

    def as_dict(self) -> Dict[str, float]:
        return {'atol': self.atol, 'rtol': self.rtol}


def resolve(tol: Optional[Tolerance]) -> Tolerance:
    return tol if tol is not None else Tolerance.default()


def normalized_slack(slack: float, scale: float) -> float:
    """Slack divided by the chain scale, so campaigns over different f are comparable."""
    if scale <= 0.0:
        return 0.0
    return slack / scale


@dataclass(frozen=True)
class Term:
    name: str
    value: float


@dataclass(frozen=True)
class BoundReport:
    """
    A chain of inequality terms ordered from largest to smallest:
    terms[0] >= terms[1] >= ... >= terms[-1]. Each consecutive link has a slack.
    """

    theorem: str
    terms: Tuple[Term, ...]
    tolerance: Tolerance = field(default_factory=Tolerance)
    notes: Tuple[str, ...] = ()
    extras: Dict[str, Any] = field(default_factory=dict)

    @property
    def slacks(self) -> Tuple[float, ...]:
        return tuple(
            upper.value - lower.value
            for upper, lower in zip(self.terms, self.terms[1:])
        )

    @property
    def scale(self) -> float:
        return max((abs(term.value) for term in self.terms), default=0.0)

    @property
    def worst_slack(self) -> float:
        return min(self.slacks, default=0.0)

    @property
    def verdict(self) -> str:
        if self.tolerance.admits(self.worst_slack, self.scale):
            return VERIFIED
        return VIOLATED

    @property
    def verified(self) -> bool:
        return self.verdict == VERIFIED

    def term(self, name: str) -> float:
        for term in self.terms:
            if term.name == name:
                return term.value
        raise KeyError(name)

    def scaled(self, alpha: float) -> 'BoundReport':
        """Every term multiplied by alpha (alpha > 0 keeps the chain order)."""
        return BoundReport(
            theorem=self.theorem,
            terms=tuple(Term(t.name, alpha * t.value) for t in self.terms),
            tolerance=self.tolerance,
            notes=self.notes,
            extras=dict(self.extras),
        )


@dataclass(frozen=True)
class RefinementTerms:
    """A gap together with the nonnegative terms proven to fit inside it."""

    theorem: str
    gap: Term
    terms: Tuple[Term, ...]
    tolerance: Tolerance = field(default_factory=Tolerance)
    notes: Tuple[str, ...] = ()
    extras: Dict[str, Any] = field(default_factory=dict)

    @property
    def total(self) -> float:
        return float(sum(term.value for term in self.terms))

    @property
    def slack(self) -> float:
        return self.gap.value - self.total

    @property
    def scale(self) -> float:
        values = [abs(self.gap.value), abs(self.total)]
        values.extend(abs(term.value) for term in self.terms)
        return max(values)

    @property
    def verdict(self) -> str:
        if self.tolerance.admits(self.slack, self.scale):
            return VERIFIED
        return VIOLATED

    @property
    def verified(self) -> bool:
        return self.verdict == VERIFIED

    def term(self, name: str) -> float:
        for term in self.terms:
            if term.name == name:
                return term.value
        raise KeyError(name)
