"""
Service layer for the half-cylinder extension.
Handles the lazily evaluated extension v(x, ξ), its energies and the Dirichlet-to-Neumann map.
"""

import logging
from dataclasses import dataclass

import numpy as np
from django.conf import settings

from core.exceptions import MasslessExtension
from extension.profile import ExtensionProfile, make_profile, weighted_integral
from extension.richardson import extrapolate_to_boundary, validate_probes
from spectral.fields import FourierField, GridField
from spectral.params import ProblemParams
from spectral.services import to_grid

logger = logging.getLogger(__name__)

# pure extensions differ from κ_s only by quadrature error
EQUALITY_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class ExtensionField:
    """
    v(x, ξ) = Σ c_k θ(λ_k ξ) e^{iωk·x} / sqrt(T^N), never stored on a cylinder grid.
    """

    trace: FourierField
    profile: ExtensionProfile

    @property
    def params(self) -> ProblemParams:
        return self.trace.params

    def mode_values(self, xi: float) -> np.ndarray:
        return self.profile.theta(self.params.eigenvalues * float(xi))

    def sample(self, xi: float) -> GridField:
        """
        The slice v(·, ξ) on the x grid.
        """
        return to_grid(self.trace.with_coeffs(self.trace.coeffs * self.mode_values(xi)))


def extend(u: FourierField) -> ExtensionField:
    return ExtensionField(trace=u, profile=make_profile(u.params.order))


def _weights(v: ExtensionField) -> np.ndarray:
    return np.abs(v.trace.coeffs) ** 2


def _require_energy_space(v: ExtensionField):
    params = v.params
    if params.mass == 0 and v.trace.mean_coefficient != 0:
        raise MasslessExtension(mean=abs(v.trace.mean_coefficient))


def extension_energy(v: ExtensionField) -> float:
    """
    ‖v‖²_X = ∫ξ^{1-2s}(|∇v|² + m²v²) = Σ |c_k|² λ_k^{2s} E_θ, with E_θ the profile energy.
    """
    _require_energy_space(v)
    return float(np.sum(_weights(v) * v.params.symbol) * v.profile.energy())


def gradient_energy(v: ExtensionField) -> float:
    """
    ∫ξ^{1-2s}|∇v|², i.e. the extension energy without the mass term.
    """
    _require_energy_space(v)
    params = v.params
    derivative_part, value_part = v.profile.energy_parts()
    # ω²|k|²/λ² in front of the value part, 0 where λ = 0
    lam_squared = params.eigenvalues**2
    ratio = np.divide(
        params.omega**2 * params.k_squared, lam_squared, out=np.zeros_like(lam_squared), where=lam_squared > 0
    )
    per_mode = params.symbol * (derivative_part + ratio * value_part)
    return float(np.sum(_weights(v) * per_mode))


def derivative_energy(v: ExtensionField) -> float:
    """
    ‖∂_ξ v‖² = Σ |c_k|² λ_k^{2s} ∫η^{1-2s}θ'²; finite even for the massless zero mode.
    """
    derivative_part, _ = v.profile.energy_parts()
    return float(np.sum(_weights(v) * v.params.symbol) * derivative_part)


# --- Dirichlet-to-Neumann map ---


def conormal_symbol(profile: ExtensionProfile, lam: float, probes, tol: float = None) -> tuple:
    """
    (-lim ξ^{1-2s} ∂_ξ θ(λξ), residual) for one decay rate, extrapolated from the probe heights.
    """
    if lam == 0.0:
        return 0.0, 0.0
    heights = lam * probes
    result = extrapolate_to_boundary(heights, profile.conormal(heights), profile.order, tol=tol)
    return lam ** (2.0 * profile.order) * result.limit, result.residual


def dtn_apply(v: ExtensionField, probes=None, tol: float = None) -> FourierField:
    """
    Conormal derivative of v at the base, mode by mode; approximately κ_s (-Δ+m²)^s u.
    """
    defaults = settings.LAB_DEFAULTS
    probes = validate_probes(defaults["probes"] if probes is None else probes)
    tol = defaults["probe_tol"] if tol is None else tol

    eigenvalues = v.params.eigenvalues
    symbol = np.zeros_like(eigenvalues)
    worst = 0.0
    for lam in np.unique(eigenvalues):
        value, residual = conormal_symbol(v.profile, float(lam), probes, tol=tol)
        symbol[eigenvalues == lam] = value
        worst = max(worst, residual)
    logger.debug("dtn_apply: %d decay rates, worst extrapolation residual %.3e", np.unique(eigenvalues).size, worst)
    return v.trace.with_coeffs(v.trace.coeffs * symbol)


# --- trace inequality and strip bound ---


@dataclass(frozen=True)
class TraceInequalityReport:
    label: str
    lhs: float
    rhs: float
    gap: float
    relative_gap: float
    holds: bool
    is_extension: bool


def trace_inequality_check(v_trace: FourierField, perturbation=None) -> TraceInequalityReport:
    """
    Compares κ_s|u|²_H with the energy of the competitor built from `perturbation` (any object with
    `energy()` and `label`, the Bessel profile when omitted) placed on every mode.
    """
    profile = make_profile(v_trace.params.order)
    competitor = profile if perturbation is None else perturbation
    label = getattr(competitor, "label", "theta")

    weighted = float(np.sum(np.abs(v_trace.coeffs) ** 2 * v_trace.params.symbol))
    lhs = profile.kappa_s * weighted
    rhs = competitor.energy() * weighted
    gap = rhs - lhs
    scale = max(lhs, EQUALITY_TOL)
    relative_gap = gap / scale
    report = TraceInequalityReport(
        label=label,
        lhs=lhs,
        rhs=rhs,
        gap=gap,
        relative_gap=relative_gap,
        holds=bool(gap >= -EQUALITY_TOL * max(1.0, lhs)),
        is_extension=bool(abs(gap) <= EQUALITY_TOL * max(1.0, lhs)),
    )
    if not report.holds:
        logger.warning("Trace inequality violated for %s: lhs=%.6e rhs=%.6e", label, lhs, rhs)
    return report


@dataclass(frozen=True)
class StripBoundReport:
    delta: float
    strip: float
    trace_term: float
    derivative_term: float
    slack: float
    holds: bool


def strip_energy(v: ExtensionField, delta: float) -> float:
    """
    ∫_0^δ ξ^{1-2s} ∫|v(x,ξ)|² dx dξ, one weighted quadrature per distinct decay rate.
    """
    s = v.params.order
    eigenvalues = v.params.eigenvalues
    weights = _weights(v)
    total = 0.0

    def theta_squared(x):
        return v.profile.theta(np.array([x]))[0] ** 2

    for lam in np.unique(eigenvalues[weights > 0]):
        mass = float(np.sum(weights[eigenvalues == lam]))
        lam = float(lam)
        if lam == 0.0:
            total += mass * delta ** (2.0 - 2.0 * s) / (2.0 - 2.0 * s)
            continue
        integral = weighted_integral(theta_squared, 1.0 - 2.0 * s, upper=lam * delta)
        total += mass * lam ** (2.0 * s - 2.0) * integral
    return total


def strip_bound_check(v: ExtensionField, delta: float) -> StripBoundReport:
    """
    ‖v‖²_{strip} <= δ^{2-2s}/(1-s) |u|²_{L²} + δ²/(2s) ‖∂_ξ v‖² on the strip 0 < ξ < δ.
    """
    s = v.params.order
    strip = strip_energy(v, delta)
    trace_term = delta ** (2.0 - 2.0 * s) / (1.0 - s) * float(np.sum(_weights(v)))
    derivative_term = delta**2 / (2.0 * s) * derivative_energy(v)
    slack = trace_term + derivative_term - strip
    return StripBoundReport(
        delta=float(delta),
        strip=strip,
        trace_term=trace_term,
        derivative_term=derivative_term,
        slack=slack,
        holds=bool(slack >= -EQUALITY_TOL * max(1.0, strip)),
    )
