# core/catalog.py - closed catalog of convex functions and power-type moduli

import logging
import math
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np

from .exceptions import DomainError, InputError

logger = logging.getLogger(__name__)

POWER = 'power'
SQUARE = 'square'
EXP = 'exp'
XLOGX = 'xlogx'
ABS_POWER = 'abs_power'

FUNCTION_KINDS = (POWER, SQUARE, EXP, XLOGX, ABS_POWER)
EXPONENT_KINDS = (POWER, ABS_POWER)


@dataclass(frozen=True)
class Interval:
    """Closed interval [a, b] with a < b."""

    a: float
    b: float

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise InputError(f"interval endpoints must be finite, got [{self.a}, {self.b}]")
        if not self.a < self.b:
            raise InputError(f"interval needs a < b, got [{self.a}, {self.b}]")

    @property
    def length(self) -> float:
        return self.b - self.a

    def contains(self, x) -> bool:
        values = np.asarray(x, dtype=float)
        return bool(np.all((values >= self.a) & (values <= self.b)))

    def as_list(self):
        return [self.a, self.b]


@dataclass(frozen=True)
class Domain:
    lo: float
    hi: float
    lo_closed: bool

    def contains(self, x) -> bool:
        values = np.asarray(x, dtype=float)
        above = values >= self.lo if self.lo_closed else values > self.lo
        return bool(np.all(above & (values <= self.hi)))

    def interior(self, x) -> bool:
        values = np.asarray(x, dtype=float)
        return bool(np.all((values > self.lo) & (values < self.hi)))

    def covers(self, interval: Interval) -> bool:
        return self.contains([interval.a, interval.b])


@dataclass(frozen=True)
class FunctionSpec:
    """
    A catalog convex function: power x^r (x >= 0, r >= 1), square, exp,
    x*log(x) (x > 0) or |x|^r (r >= 2), optionally multiplied by scale > 0.
    """

    kind: str
    exponent: Optional[float] = None
    scale: float = 1.0

    def __post_init__(self):
        if self.kind not in FUNCTION_KINDS:
            raise InputError(f"unknown function kind '{self.kind}', expected one of {', '.join(FUNCTION_KINDS)}")
        if self.kind in EXPONENT_KINDS:
            if self.exponent is None:
                raise InputError(f"function kind '{self.kind}' needs an exponent")
            minimum = 1.0 if self.kind == POWER else 2.0
            if not self.exponent >= minimum:
                raise InputError(f"'{self.kind}' exponent must be >= {minimum:g}, got {self.exponent}")
        elif self.exponent is not None:
            raise InputError(f"function kind '{self.kind}' takes no exponent")
        if not self.scale > 0:
            raise InputError(f"function scale must be > 0, got {self.scale}")

    @property
    def domain(self) -> Domain:
        if self.kind == POWER:
            return Domain(0.0, math.inf, lo_closed=True)
        if self.kind == XLOGX:
            return Domain(0.0, math.inf, lo_closed=False)
        return Domain(-math.inf, math.inf, lo_closed=False)

    @property
    def label(self) -> str:
        if self.kind == POWER:
            base = f"x^{self.exponent:g}"
        elif self.kind == ABS_POWER:
            base = f"|x|^{self.exponent:g}"
        else:
            base = {SQUARE: "x^2", EXP: "exp(x)", XLOGX: "x*log(x)"}[self.kind]
        return base if self.scale == 1.0 else f"{self.scale:g}*{base}"

    def value(self, x):
        values = np.asarray(x, dtype=float)
        if not self.domain.contains(values):
            raise DomainError(f"{self.label}: point(s) {values.tolist()} outside the domain")
        if self.kind == POWER:
            out = np.power(values, self.exponent)
        elif self.kind == SQUARE:
            out = values * values
        elif self.kind == EXP:
            out = np.exp(values)
        elif self.kind == XLOGX:
            out = values * np.log(values)
        else:
            out = np.power(np.abs(values), self.exponent)
        out = self.scale * out if self.scale != 1.0 else out
        return float(out) if out.ndim == 0 else out

    def derivative(self, x):
        values = np.asarray(x, dtype=float)
        if not self.domain.interior(values):
            raise DomainError(f"{self.label}: derivative requested outside the open domain at {values.tolist()}")
        if self.kind == POWER:
            out = self.exponent * np.power(values, self.exponent - 1.0)
        elif self.kind == SQUARE:
            out = 2.0 * values
        elif self.kind == EXP:
            out = np.exp(values)
        elif self.kind == XLOGX:
            out = np.log(values) + 1.0
        else:
            out = self.exponent * np.power(np.abs(values), self.exponent - 1.0) * np.sign(values)
        out = self.scale * out if self.scale != 1.0 else out
        return float(out) if out.ndim == 0 else out

    def as_dict(self) -> Dict:
        data = {'kind': self.kind}
        if self.exponent is not None:
            data['exponent'] = self.exponent
        if self.scale != 1.0:
            data['scale'] = self.scale
        return data


@dataclass(frozen=True)
class ModulusSpec:
    """Power-type modulus phi(d) = c * d^r with c > 0, r >= 2."""

    coefficient: float
    exponent: float = 2.0

    def __post_init__(self):
        if not self.coefficient > 0:
            raise InputError(f"modulus coefficient must be > 0, got {self.coefficient}")
        if not self.exponent >= 2:
            raise InputError(f"modulus exponent must be >= 2, got {self.exponent}")

    @property
    def label(self) -> str:
        return f"{self.coefficient:g}*d^{self.exponent:g}"

    def value(self, d):
        values = np.asarray(d, dtype=float)
        if np.any(values < 0):
            raise InputError(f"modulus argument must be >= 0 (pass |x - y|), got {values.tolist()}")
        out = self.coefficient * np.power(values, self.exponent)
        return float(out) if out.ndim == 0 else out

    def scaled(self, alpha: float) -> 'ModulusSpec':
        return ModulusSpec(self.coefficient * alpha, self.exponent)

    def assert_monotone(self, span: float, points: int = 1000) -> None:
        """Phi(0) = 0 and phi nondecreasing on [0, span]."""
        grid = np.linspace(0.0, span, points)
        values = self.value(grid)
        if values[0] != 0.0:
            raise InputError(f"modulus {self.label} has phi(0) = {values[0]} != 0")
        if np.any(np.diff(values) < 0):
            raise InputError(f"modulus {self.label} decreases somewhere on [0, {span}]")

    def as_dict(self) -> Dict:
        return {'kind': 'power', 'coefficient': self.coefficient, 'exponent': self.exponent}


def eval_f(f: FunctionSpec, x: float) -> float:
    return f.value(x)


def eval_f_derivative(f: FunctionSpec, x: float) -> float:
    return f.derivative(x)


def eval_phi(phi: ModulusSpec, d: float) -> float:
    return phi.value(d)


def known_modulus(f: FunctionSpec, interval: Interval) -> Optional[ModulusSpec]:
    """
    An analytically valid power-type modulus of f on the interval, if one is known.

    Strongly convex entries use c = min f'' / 2 with exponent 2; x^r and |x|^r
    with r >= 2 use half of the midpoint constant of |x|^r, i.e. c = 2^(1-r).
    """
    if not f.domain.covers(interval):
        raise DomainError(f"{f.label}: interval [{interval.a}, {interval.b}] leaves the domain")
    a, b = interval.a, interval.b
    if f.kind == SQUARE:
        c, r = 1.0, 2.0
    elif f.kind == EXP:
        c, r = math.exp(a) / 2.0, 2.0
    elif f.kind == XLOGX:
        c, r = 1.0 / (2.0 * b), 2.0
    elif f.kind == ABS_POWER or (f.kind == POWER and f.exponent >= 2.0):
        c, r = 2.0 ** (1.0 - f.exponent), f.exponent
    elif f.kind == POWER and f.exponent > 1.0:
        c, r = f.exponent * (f.exponent - 1.0) * b ** (f.exponent - 2.0) / 2.0, 2.0
    else:
        logger.debug(f"No uniform-convexity modulus for {f.label}")
        return None
    return ModulusSpec(c * f.scale, r)


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    function: FunctionSpec
    interval: Interval

    @property
    def modulus(self) -> Optional[ModulusSpec]:
        return known_modulus(self.function, self.interval)


PRESETS: Dict[str, CatalogEntry] = {
    entry.name: entry
    for entry in (
        CatalogEntry('square', FunctionSpec(SQUARE), Interval(-1.0, 2.0)),
        CatalogEntry('exp', FunctionSpec(EXP), Interval(0.0, 1.0)),
        CatalogEntry('xlogx', FunctionSpec(XLOGX), Interval(0.5, 3.0)),
        CatalogEntry('power3', FunctionSpec(POWER, 3.0), Interval(0.0, 2.0)),
        CatalogEntry('power1.5', FunctionSpec(POWER, 1.5), Interval(0.25, 2.0)),
        CatalogEntry('abs_power4', FunctionSpec(ABS_POWER, 4.0), Interval(-1.0, 1.0)),
    )
}


def preset(name: str) -> CatalogEntry:
    try:
        return PRESETS[name]
    except KeyError:
        raise InputError(f"unknown catalog entry '{name}', expected one of {', '.join(PRESETS)}") from None
