"""
Builtin nonlinearities f(x, t) = a(x) f₀(t) with closed-form primitives.
"""

import math
import re
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from core.exceptions import InvalidParams, UnknownLabel

LOG_SUPERLINEAR = "log_superlinear"
PURE_POWER = "pure_power"
MODULATED_POWER = "modulated_power"
ZERO = "zero"

BUILTIN_LABELS = (LOG_SUPERLINEAR, PURE_POWER, MODULATED_POWER, ZERO)

# below this |t| the closed forms of the logarithmic primitive lose every digit to cancellation
_SERIES_CUTOFF = 1e-3

_LABEL_RE = re.compile(r"^\s*(?P<name>[a-z_]+)\s*(?:\(\s*(?P<arg>[^)]*)\s*\))?\s*$")


@dataclass(frozen=True)
class Nonlinearity:
    """
    The triple (f, F, G) plus f_t. The t-profile is shared by every x; the optional modulation
    a(x) > 0 is T-periodic and multiplies all of them.
    """

    label: str
    exponent: float
    gamma: float
    growth: float
    profile: Callable
    primitive: Callable
    slope: Callable
    excess: Callable
    modulation: Optional[Callable] = None
    modulation_range: tuple = (1.0, 1.0)
    period: float = 2.0 * math.pi

    @property
    def is_zero(self) -> bool:
        return self.label == ZERO

    def amplitude(self, coords):
        if self.modulation is None:
            return 1.0
        return self.modulation(coords)

    def f(self, coords, t):
        return self.amplitude(coords) * self.profile(np.asarray(t, dtype=float))

    def F(self, coords, t):
        return self.amplitude(coords) * self.primitive(np.asarray(t, dtype=float))

    def G(self, coords, t):
        """
        f t - 2F, evaluated without cancellation.
        """
        return self.amplitude(coords) * self.excess(np.asarray(t, dtype=float))

    def f_t(self, coords, t):
        return self.amplitude(coords) * self.slope(np.asarray(t, dtype=float))

    @property
    def modulation_min(self) -> float:
        return self.modulation_range[0]


# --- t-profiles ---


def _log_profile(t):
    return t * np.log1p(np.abs(t))


def _log_primitive(t):
    a = np.abs(t)
    small = a < _SERIES_CUTOFF
    safe = np.where(small, 1.0, a)
    closed = 0.5 * (safe * safe - 1.0) * np.log1p(safe) - 0.25 * safe * safe + 0.5 * safe
    series = a**3 / 3.0 - a**4 / 8.0 + a**5 / 15.0 - a**6 / 24.0
    return np.where(small, series, closed)


def _log_excess(t):
    a = np.abs(t)
    small = a < _SERIES_CUTOFF
    safe = np.where(small, 1.0, a)
    closed = np.log1p(safe) + 0.5 * safe * safe - safe
    series = a**3 / 3.0 - a**4 / 4.0 + a**5 / 5.0 - a**6 / 6.0
    return np.where(small, series, closed)


def _log_slope(t):
    a = np.abs(t)
    return np.log1p(a) + a / (1.0 + a)


def log_superlinear(exponent: float = 3.0, period: float = 2.0 * math.pi) -> Nonlinearity:
    """
    f(t) = t log(1 + |t|): superlinear and subcritical, yet f t / F -> 2, so (AR) fails.
    |f| <= 1 + |t|³ on all of ℝ, hence the default growth exponent 3 with C = 1.
    """
    return Nonlinearity(
        label=LOG_SUPERLINEAR,
        exponent=float(exponent),
        gamma=1.0,
        growth=1.0,
        profile=_log_profile,
        primitive=_log_primitive,
        slope=_log_slope,
        excess=_log_excess,
        period=period,
    )


def pure_power(exponent: float = 3.0, period: float = 2.0 * math.pi) -> Nonlinearity:
    p = float(exponent)

    def profile(t):
        return np.abs(t) ** (p - 1.0) * t

    def primitive(t):
        return np.abs(t) ** (p + 1.0) / (p + 1.0)

    def slope(t):
        return p * np.abs(t) ** (p - 1.0)

    def excess(t):
        return (p - 1.0) / (p + 1.0) * np.abs(t) ** (p + 1.0)

    return Nonlinearity(
        label=f"{PURE_POWER}({p:g})",
        exponent=p,
        gamma=1.0,
        growth=1.0,
        profile=profile,
        primitive=primitive,
        slope=slope,
        excess=excess,
        period=period,
    )


def modulated_power(exponent: float = 3.0, period: float = 2.0 * math.pi) -> Nonlinearity:
    """
    a(x) |t|^{p-1} t with a(x) = 1 + ½ Π cos(ωx_i), so a ∈ [1/2, 3/2].
    """
    base = pure_power(exponent, period)
    omega = 2.0 * math.pi / period

    def modulation(coords):
        return 1.0 + 0.5 * np.prod([np.cos(omega * np.asarray(x, dtype=float)) for x in coords], axis=0)

    return Nonlinearity(
        label=f"{MODULATED_POWER}({base.exponent:g})",
        exponent=base.exponent,
        gamma=1.0,
        growth=1.5,
        profile=base.profile,
        primitive=base.primitive,
        slope=base.slope,
        excess=base.excess,
        modulation=modulation,
        modulation_range=(0.5, 1.5),
        period=period,
    )


def _vanishing(t):
    return np.zeros_like(t)


def zero(exponent: float = 3.0, period: float = 2.0 * math.pi) -> Nonlinearity:
    return Nonlinearity(
        label=ZERO,
        exponent=float(exponent),
        gamma=1.0,
        growth=1.0,
        profile=_vanishing,
        primitive=_vanishing,
        slope=_vanishing,
        excess=_vanishing,
        period=period,
    )


_BUILDERS = {
    LOG_SUPERLINEAR: log_superlinear,
    PURE_POWER: pure_power,
    MODULATED_POWER: modulated_power,
    ZERO: zero,
}


def parse_label(label: str) -> tuple:
    """
    "pure_power(3)" -> ("pure_power", 3.0); "log_superlinear" -> ("log_superlinear", None).
    """
    match = _LABEL_RE.match(label or "")
    if not match or match.group("name") not in _BUILDERS:
        raise UnknownLabel(label=label)
    arg = match.group("arg")
    if arg is None or arg == "":
        return match.group("name"), None
    try:
        return match.group("name"), float(arg)
    except ValueError:
        raise UnknownLabel(f"exponent '{arg}' is not a number", label=label) from None


def builtin_nonlinearity(label: str, exponent: float = None, period: float = 2.0 * math.pi) -> Nonlinearity:
    name, parsed = parse_label(label)
    if parsed is not None and exponent is not None and parsed != exponent:
        raise InvalidParams("exponent given twice with different values", label=label, exponent=exponent)
    p = parsed if parsed is not None else exponent
    if p is None:
        p = 3.0
    if not p > 1.0:
        raise InvalidParams("growth exponent must exceed 1", exponent=p)
    return _BUILDERS[name](p, period)
