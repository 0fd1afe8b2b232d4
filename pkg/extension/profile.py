"""
The Bessel profile θ of the half-cylinder extension and its one-dimensional energies.

θ(ξ) = (2/Γ(s)) (ξ/2)^s K_s(ξ) solves θ'' + ((1-2s)/ξ)θ' = θ with θ(0) = 1, θ(∞) = 0.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate
from scipy.special import gamma, kv

from core.exceptions import OrderOutOfRange
from spectral.params import kappa_constant

logger = logging.getLogger(__name__)

# the weighted integrands decay like e^{-2ξ}; past this height they are below 1e-30
_ENERGY_HEIGHT = 40.0
_QUAD_OPTIONS = {"epsabs": 1e-14, "epsrel": 1e-12, "limit": 200}


@dataclass(frozen=True)
class ExtensionProfile:
    order: float
    kappa_s: float

    def theta(self, xi) -> np.ndarray:
        s = self.order
        xi = np.asarray(xi, dtype=float)
        out = np.ones_like(xi)
        positive = xi > 0
        x = xi[positive]
        out[positive] = (2.0 / gamma(s)) * (x / 2.0) ** s * kv(s, x)
        return out

    def derivative(self, xi) -> np.ndarray:
        """
        θ'(ξ) = -(2^{1-s}/Γ(s)) ξ^s K_{1-s}(ξ); at ξ = 0 the one-sided limit (-∞, -1 or 0).
        """
        s = self.order
        xi = np.asarray(xi, dtype=float)
        at_zero = -np.inf if s < 0.5 else (-1.0 if s == 0.5 else 0.0)
        out = np.full_like(xi, at_zero)
        positive = xi > 0
        x = xi[positive]
        out[positive] = -(2.0 ** (1.0 - s) / gamma(s)) * x**s * kv(1.0 - s, x)
        return out

    def conormal(self, xi) -> np.ndarray:
        """
        -ξ^{1-2s} θ'(ξ) = (2^{1-s}/Γ(s)) ξ^{1-s} K_{1-s}(ξ), which tends to κ_s as ξ -> 0.
        """
        s = self.order
        xi = np.asarray(xi, dtype=float)
        out = np.full_like(xi, self.kappa_s)
        positive = xi > 0
        x = xi[positive]
        out[positive] = (2.0 ** (1.0 - s) / gamma(s)) * x ** (1.0 - s) * kv(1.0 - s, x)
        return out

    def energy_parts(self) -> tuple:
        """
        (∫ξ^{1-2s}θ'² dξ, ∫ξ^{1-2s}θ² dξ) over (0, ∞).
        """
        return profile_energy_parts(self.order)

    def energy(self) -> float:
        derivative_part, value_part = self.energy_parts()
        return derivative_part + value_part

    def value(self, xi) -> np.ndarray:
        return self.theta(xi)


def make_profile(order: float) -> ExtensionProfile:
    if not 0.0 < order < 1.0:
        raise OrderOutOfRange(order=order)
    return ExtensionProfile(order=float(order), kappa_s=kappa_constant(order))


def weighted_integral(func, exponent: float, upper: float = np.inf) -> float:
    """
    ∫_0^upper ξ^exponent func(ξ) dξ with the algebraic endpoint weight handled by QAWS on [0, min(1, upper)].
    """
    head_end = min(1.0, upper)
    head, _ = integrate.quad(
        lambda x: float(func(x)), 0.0, head_end, weight="alg", wvar=(exponent, 0.0), **_QUAD_OPTIONS
    )
    if upper <= 1.0:
        return head
    body_end = min(_ENERGY_HEIGHT, upper)
    body, _ = integrate.quad(lambda x: x**exponent * float(func(x)), 1.0, body_end, **_QUAD_OPTIONS)
    total = head + body
    if upper > _ENERGY_HEIGHT:
        tail, _ = integrate.quad(lambda x: x**exponent * float(func(x)), _ENERGY_HEIGHT, upper, **_QUAD_OPTIONS)
        total += tail
    return total


@lru_cache(maxsize=64)
def profile_energy_parts(order: float) -> tuple:
    profile = make_profile(order)
    s = profile.order

    def conormal_squared(x):
        return profile.conormal(np.array([x]))[0] ** 2

    def theta_squared(x):
        return profile.theta(np.array([x]))[0] ** 2

    # ξ^{1-2s}θ'² = ξ^{2s-1} g², with g the conormal
    derivative_part = weighted_integral(conormal_squared, 2.0 * s - 1.0)
    value_part = weighted_integral(theta_squared, 1.0 - 2.0 * s)
    logger.debug("profile energy at s=%s: %s + %s", s, derivative_part, value_part)
    return derivative_part, value_part


@dataclass(frozen=True)
class TrialProfile:
    """
    Any competitor φ with φ(0) = 1 in the weighted energy space; used to test minimality.
    """

    order: float
    value_fn: object
    derivative_fn: object
    label: str = "trial"

    def value(self, xi):
        return self.value_fn(np.asarray(xi, dtype=float))

    def energy_parts(self) -> tuple:
        """
        Quadrature of both weighted energies; value_fn and derivative_fn must be smooth on [0, ∞).
        """
        s = self.order

        def derivative_squared(x):
            return float(self.derivative_fn(np.asarray(x, dtype=float))) ** 2

        def value_squared(x):
            return float(self.value_fn(np.asarray(x, dtype=float))) ** 2

        return (
            weighted_integral(derivative_squared, 1.0 - 2.0 * s),
            weighted_integral(value_squared, 1.0 - 2.0 * s),
        )

    def energy(self) -> float:
        return sum(self.energy_parts())


def exponential_trial(order: float) -> TrialProfile:
    """
    φ(ξ) = e^{-ξ}; its energy is 2Γ(2-2s)/2^{2-2s}, equal to κ_s only at s = 1/2.
    """
    return TrialProfile(order, lambda x: np.exp(-x), lambda x: -np.exp(-x), label="exponential")


@dataclass(frozen=True)
class PerturbedProfile:
    """
    θ(ξ) + a ξ e^{-ξ}: same trace as θ, strictly larger energy for a != 0.
    """

    base: ExtensionProfile
    amplitude: float

    @property
    def order(self) -> float:
        return self.base.order

    @property
    def label(self) -> str:
        return f"perturbed({self.amplitude:g})"

    def value(self, xi):
        xi = np.asarray(xi, dtype=float)
        return self.base.theta(xi) + self.amplitude * xi * np.exp(-xi)

    def energy_parts(self) -> tuple:
        s = self.order
        a = self.amplitude
        base_derivative, base_value = self.base.energy_parts()

        def conormal_bump(x):
            return self.base.conormal(np.array([x]))[0] * (1.0 - x) * np.exp(-x)

        def theta_bump(x):
            return self.base.theta(np.array([x]))[0] * np.exp(-x)

        # ξ^{1-2s}θ' = -g is bounded, so the derivative cross term needs no weight
        cross_derivative = -2.0 * a * integrate.quad(conormal_bump, 0.0, _ENERGY_HEIGHT, **_QUAD_OPTIONS)[0]
        cross_value = 2.0 * a * weighted_integral(theta_bump, 2.0 - 2.0 * s)
        bump_derivative = a * a * weighted_integral(lambda x: (1.0 - x) ** 2 * np.exp(-2.0 * x), 1.0 - 2.0 * s)
        bump_value = a * a * weighted_integral(lambda x: np.exp(-2.0 * x), 3.0 - 2.0 * s)
        return base_derivative + cross_derivative + bump_derivative, base_value + cross_value + bump_value

    def energy(self) -> float:
        return sum(self.energy_parts())


def perturbed_profile(profile: ExtensionProfile, amplitude: float) -> PerturbedProfile:
    return PerturbedProfile(profile, float(amplitude))


def profile_table(profile: ExtensionProfile, heights) -> list:
    """
    Rows (ξ, θ, θ') for plotting.
    """
    heights = np.asarray(heights, dtype=float)
    theta = profile.theta(heights)
    derivative = profile.derivative(heights)
    return [(float(x), float(t), float(d)) for x, t, d in zip(heights, theta, derivative)]
