"""
Linking geometry and the mesh min-max search.

The trace space splits into constants Y (the k = 0 mode) and zero-mean fields Z. The search
runs over the half disc M = {a ŷ + t ẑ : a² + t² <= ρ², t >= 0} spanned by the unit constant ŷ
and the unit test direction ẑ; its boundary M₀ (rim and the t = 0 diameter) stays pinned.
All norms are ‖u‖ = sqrt(κ) |u|_H.
"""

import copy
import logging
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import beta

from core.context import get_current_rng
from core.exceptions import (
    ConvergedToTrivial,
    DivergentSum,
    GeometryInfeasible,
    SolverError,
    StagnationWithoutConvergence,
)
from extension.profile import weighted_integral
from spectral.fields import FourierField
from spectral.params import ProblemParams
from spectral.services import (
    constant_field,
    hs_norm,
    pairing,
    product_sine,
    random_field,
    shifted_form,
    single_mode,
    split_mean,
)
from variational.embedding import hy_constant
from variational.functional import functional_gradient, functional_value
from variational.hypotheses import bound_constant, growth_constant
from variational.nonlinearities import Nonlinearity
from variational.refine import MinMaxResult, SolverOptions, refine

logger = logging.getLogger(__name__)

SAMPLE_TOL_Y = 1e-10
SAMPLE_TOL_SPHERE = 1e-10
SAMPLE_TOL_RIM = 1e-8
ARMIJO = 1e-4
MIN_STEP = 2.0**-20
MAX_RADIUS = 0.5
RATIO_TOL = 1e-10
COERCIVITY_TOL = 1e-6
# mesh rows inside this fraction of ρ follow the moving direction; outer rows fade back to M₀
HOLD_FRACTION = 0.5
MAX_TURN = 0.25


def split(u: FourierField) -> tuple:
    """
    (y, z): the constant part and the zero-mean remainder, u = y + z exactly.
    """
    return split_mean(u)


def norm(u: FourierField) -> float:
    return math.sqrt(u.params.kappa) * hs_norm(u)


def first_symbol(params: ProblemParams) -> float:
    """
    (ω² + m²)^s, the smallest symbol on Z.
    """
    return (params.omega**2 + params.mass**2) ** params.order


def coercivity_constant(params: ProblemParams) -> float:
    """
    C_m = 1 - m^{2s}/(ω²+m²)^s: the sharp constant in ‖z‖² - κ m^{2s}|z|²_{L²} >= C_m ‖z‖² on Z.
    """
    return 1.0 - params.mass_power / first_symbol(params)


def sampled_coercivity(params: ProblemParams, samples: int = 1000, rng=None) -> float:
    """
    Minimum of the Rayleigh quotient over the unit modes and random zero-mean fields.
    """
    rng = rng or get_current_rng()
    candidates = []
    for axis in range(params.dim):
        k = [0] * params.dim
        k[axis] = 1
        candidates.append(single_mode(params, k, 1.0, real=True))
    for _ in range(samples):
        candidates.append(random_field(params, rng, real=True, zero_mean=True))
    return float(min(shifted_form(z) / hs_norm(z) ** 2 for z in candidates))


@dataclass(frozen=True)
class CoercivityReport:
    closed: float
    sampled: float
    samples: int

    @property
    def holds(self) -> bool:
        return abs(self.sampled - self.closed) <= COERCIVITY_TOL


def coercivity_check(params: ProblemParams, samples: int = 1000, rng=None) -> CoercivityReport:
    report = CoercivityReport(
        closed=coercivity_constant(params),
        sampled=sampled_coercivity(params, samples=samples, rng=rng),
        samples=samples,
    )
    if not report.holds:
        logger.warning("Sampled coercivity %.12g disagrees with C_m = %.12g", report.sampled, report.closed)
    return report


# --- the test extension w = Π sin(ωx_i) / (ξ + 1) ---


@dataclass(frozen=True)
class EnergyRatioConstants:
    I2: float
    I4: float
    C1: float
    C2: float
    C3: float


def profile_integrals(order: float) -> tuple:
    """
    (∫ξ^{1-2s}(1+ξ)^{-2}, ∫ξ^{1-2s}(1+ξ)^{-4}) by weighted quadrature, checked against Beta values.
    """
    exponent = 1.0 - 2.0 * order
    values = (
        weighted_integral(lambda x: (1.0 + x) ** -2, exponent),
        weighted_integral(lambda x: (1.0 + x) ** -4, exponent),
    )
    closed = (beta(2.0 - 2.0 * order, 2.0 * order), beta(2.0 - 2.0 * order, 2.0 + 2.0 * order))
    for value, reference in zip(values, closed):
        if abs(value - reference) > 1e-8 * reference:
            logger.warning("Profile integral %.12g disagrees with Beta value %.12g", value, reference)
    return values


def trial_extension_energy(params: ProblemParams, integrals: tuple = None) -> tuple:
    """
    (‖w‖², |w₀|²_{L²}) for w = w₀(x)/(ξ+1), measured from the sampled coefficients of w₀:
    ‖w‖² = Σ ω²|k|²|c_k|² I₂ + Σ |c_k|² (m² I₂ + I₄).
    """
    i2, i4 = integrals or profile_integrals(params.order)
    weights = np.abs(product_sine(params).coeffs) ** 2
    gradient = float(np.sum(params.omega**2 * params.k_squared * weights))
    trace = float(np.sum(weights))
    return gradient * i2 + trace * (params.mass**2 * i2 + i4), trace


def energy_ratio_constants(params: ProblemParams) -> EnergyRatioConstants:
    """
    C₁|w₀|² <= ‖w‖² <= (C₂ + m²C₃)|w₀|². C₂ and C₃ come from the profile integrals alone,
    C₁ from the measured energy of w at m = 0.
    """
    i2, i4 = profile_integrals(params.order)
    energy, trace = trial_extension_energy(params.with_mass(0.0), (i2, i4))
    return EnergyRatioConstants(I2=i2, I4=i4, C1=energy / trace, C2=params.dim * params.omega**2 * i2 + i4, C3=i2)


@dataclass(frozen=True)
class EnergyRatioReport:
    energy: float
    trace: float
    lower: float
    upper: float

    @property
    def holds(self) -> bool:
        slack = RATIO_TOL * self.upper
        return self.lower - slack <= self.energy <= self.upper + slack


def energy_ratio_check(params: ProblemParams, ratios: EnergyRatioConstants = None) -> EnergyRatioReport:
    ratios = ratios or energy_ratio_constants(params)
    energy, trace = trial_extension_energy(params, (ratios.I2, ratios.I4))
    return EnergyRatioReport(
        energy=energy,
        trace=trace,
        lower=ratios.C1 * trace,
        upper=(ratios.C2 + params.mass**2 * ratios.C3) * trace,
    )


def geometry_constant(params: ProblemParams, ratios: EnergyRatioConstants = None) -> float:
    """
    C̄ with ‖v‖² <= C̄ |v(·,0)|²_{L²} on span{ŷ, w}.
    """
    ratios = ratios or energy_ratio_constants(params)
    kappa = params.kappa
    upper = (kappa / params.kappa_s) * (ratios.C2 + params.mass**2 * ratios.C3)
    return max(kappa * params.mass_power, 1.0) * max(1.0, upper)


# --- geometry ---


@dataclass(frozen=True, eq=False)
class LinkingGeometry:
    params: ProblemParams
    exponent: float
    r: float
    rho: float
    z: FourierField
    w_trace: FourierField
    y_unit: FourierField
    C_m: float
    epsilon: float
    lower_coefficient: float
    upper_coefficient: float
    b_m: float
    C_eps: float
    Cpp: float
    C_bar: float
    A: float
    B_A: float
    ratios: EnergyRatioConstants
    bounded: bool = True

    def point(self, a: float, t: float) -> FourierField:
        """
        a ŷ + t ẑ; its norm is sqrt(a² + t²).
        """
        return self.y_unit.scale(a).axpy(t / self.r, self.z)

    def lower_bound(self, radius: float) -> float:
        """
        a ρ² - D ρ^{p+1}, the bound for J on the sphere of radius ρ in Z.
        """
        return self.lower_coefficient * radius**2 - self.upper_coefficient * radius ** (self.exponent + 1.0)

    def as_dict(self) -> dict:
        return {
            "r": self.r,
            "rho": self.rho,
            "C_m": self.C_m,
            "epsilon": self.epsilon,
            "a": self.lower_coefficient,
            "D": self.upper_coefficient,
            "b_m": self.b_m,
            "C_eps": self.C_eps,
            "Cpp": self.Cpp,
            "C_bar": self.C_bar,
            "A": self.A,
            "B_A": self.B_A,
            "C1": self.ratios.C1,
            "C2": self.ratios.C2,
            "C3": self.ratios.C3,
            "I2": self.ratios.I2,
            "I4": self.ratios.I4,
            "bounded": self.bounded,
        }


def sphere_radius(lower: float, upper: float, exponent: float) -> float:
    """
    Maximizer of a r² - D r^{p+1}, capped so that r < 1.
    """
    if upper == 0.0:
        return MAX_RADIUS
    optimum = (2.0 * lower / ((exponent + 1.0) * upper)) ** (1.0 / (exponent - 1.0))
    return min(optimum, MAX_RADIUS)


def build_geometry(params: ProblemParams, nl: Nonlinearity) -> LinkingGeometry:
    if not params.mass > 0:
        raise GeometryInfeasible("the linking geometry needs m > 0", mass=params.mass)
    p = nl.exponent
    kappa = params.kappa

    c_m = coercivity_constant(params)
    lowest = first_symbol(params)
    epsilon = params.mass * c_m / 2.0
    lower = c_m / 2.0 - epsilon / lowest
    if not lower > 0:
        epsilon = lowest * c_m / 4.0
        lower = c_m / 4.0
        logger.info("ε = m C_m / 2 leaves no quadratic margin; using ε = %.6g", epsilon)

    c_eps = growth_constant(nl, epsilon)
    try:
        cpp = hy_constant(params, p + 1.0)
    except DivergentSum as exc:
        raise GeometryInfeasible("no trace embedding into L^{p+1}", exponent=p) from exc
    upper = kappa * c_eps * cpp ** (p + 1.0)

    r = sphere_radius(lower, upper, p)
    b_m = lower * r**2 - upper * r ** (p + 1.0)
    if not b_m > 0:
        raise GeometryInfeasible(r=r, b_m=b_m)

    ratios = energy_ratio_constants(params)
    ratio_report = energy_ratio_check(params, ratios)
    if not ratio_report.holds:
        raise GeometryInfeasible("trial extension violates its energy ratio bounds", **ratio_report.__dict__)
    c_bar = geometry_constant(params, ratios)
    amplitude = c_bar / kappa
    b_a = bound_constant(nl, amplitude)
    rho_zero = math.sqrt(2.0 * kappa * b_a * params.volume)
    bounded = math.isfinite(rho_zero)
    if bounded:
        rho = max(2.0 * rho_zero, 2.0)
    else:
        rho = 2.0
        logger.warning("F does not dominate A t² for %s; the rim is not guaranteed below 0", nl.label)

    w_trace = product_sine(params)
    z = w_trace.scale(r / norm(w_trace))
    y_unit = constant_field(params, 1.0 / math.sqrt(kappa * params.mass_power * params.volume))

    geometry = LinkingGeometry(
        params=params,
        exponent=p,
        r=r,
        rho=rho,
        z=z,
        w_trace=w_trace,
        y_unit=y_unit,
        C_m=c_m,
        epsilon=epsilon,
        lower_coefficient=lower,
        upper_coefficient=upper,
        b_m=b_m,
        C_eps=c_eps,
        Cpp=cpp,
        C_bar=c_bar,
        A=amplitude,
        B_A=b_a,
        ratios=ratios,
        bounded=bounded,
    )
    logger.info(
        "Linking geometry for %s at m=%g: C_m=%.6g r=%.6g b_m=%.6g rho=%.6g",
        nl.label,
        params.mass,
        c_m,
        r,
        b_m,
        rho,
    )
    return geometry


@dataclass(frozen=True)
class GeometrySamples:
    count: int
    y_max: float
    sphere_min: float
    rim_max: float
    b_m: float
    y_ok: bool
    sphere_ok: bool
    rim_ok: bool

    @property
    def holds(self) -> bool:
        return self.y_ok and self.sphere_ok and self.rim_ok


def geometry_samples(geom: LinkingGeometry, nl: Nonlinearity, count: int = 1000, rng=None) -> GeometrySamples:
    """
    J on sampled Y (<= 0), on the sphere N_r in Z (>= b_m) and on M₀ (<= 0).
    """
    rng = rng or get_current_rng()
    params = geom.params

    y_levels = [functional_value(geom.y_unit.scale(a), nl) for a in rng.uniform(-geom.rho, geom.rho, count)]

    sphere_levels = []
    for _ in range(count):
        z = random_field(params, rng, real=True, zero_mean=True)
        sphere_levels.append(functional_value(z.scale(geom.r / norm(z)), nl))

    rim_levels = []
    for phi in rng.uniform(0.0, math.pi, count // 2):
        rim_levels.append(functional_value(geom.point(geom.rho * math.cos(phi), geom.rho * math.sin(phi)), nl))
    for a in rng.uniform(-geom.rho, geom.rho, count - count // 2):
        rim_levels.append(functional_value(geom.point(a, 0.0), nl))

    y_max, sphere_min, rim_max = max(y_levels), min(sphere_levels), max(rim_levels)
    return GeometrySamples(
        count=count,
        y_max=y_max,
        sphere_min=sphere_min,
        rim_max=rim_max,
        b_m=geom.b_m,
        y_ok=bool(y_max <= SAMPLE_TOL_Y),
        sphere_ok=bool(sphere_min >= geom.b_m - SAMPLE_TOL_SPHERE),
        rim_ok=bool(rim_max <= SAMPLE_TOL_RIM),
    )


# --- mesh min-max ---


def inner(u: FourierField, v: FourierField) -> float:
    """
    κ Re Σ σ_k u_k conj(v_k), the inner product behind `norm`.
    """
    params = u.params
    return params.kappa * float(np.real(np.vdot(v.coeffs, params.symbol * u.coeffs)))


def rim_cutoff(radii: np.ndarray, rho: float) -> np.ndarray:
    """
    1 up to HOLD_FRACTION·ρ, falling smoothly to 0 on the rim.
    """
    x = np.clip((np.asarray(radii) / rho - HOLD_FRACTION) / (1.0 - HOLD_FRACTION), 0.0, 1.0)
    return np.cos(0.5 * np.pi * x) ** 2


class PolarMesh:
    """
    Nodes (i, j) at radius R_i = ρ(i/n)^β and angle φ_j = πj/n_φ, mapped to

        a ŷ + t e_i,   a = R_i cos φ_j,  t = R_i sin φ_j,

    where e_i is the unit blend of the current direction e and the initial ẑ with weight
    `rim_cutoff(R_i)`. With e = ẑ the mesh is M itself; any other e ∈ Z gives a continuous
    deformation of M that leaves M₀ in place. Rows i = 0, i = n and columns j = 0, j = n_φ are
    pinned.
    """

    def __init__(self, geom: LinkingGeometry, nl: Nonlinearity, options: SolverOptions):
        self.geom = geom
        self.nl = nl
        radial, angular = options.mesh_radial, options.mesh_angular
        self.radii = geom.rho * (np.arange(radial + 1) / radial) ** options.mesh_grading
        self.angles = math.pi * np.arange(angular + 1) / angular
        self.a = np.outer(self.radii, np.cos(self.angles))
        self.t = np.outer(self.radii, np.sin(self.angles))
        self.pinned = np.zeros(self.a.shape, dtype=bool)
        self.pinned[[0, -1], :] = True
        self.pinned[:, [0, -1]] = True
        self.weights = rim_cutoff(self.radii, geom.rho)
        self.z_unit = geom.z.scale(1.0 / geom.r)
        self.direction = self.z_unit
        self.row_directions = self._row_directions()
        self.fields = {}
        self.levels = np.zeros(self.a.shape)
        for index in np.ndindex(self.a.shape):
            self._place(index)

    def _row_directions(self) -> list:
        rows = []
        for weight in self.weights:
            blended = self.z_unit.scale(1.0 - weight).axpy(weight, self.direction)
            size = norm(blended)
            rows.append(blended.scale(1.0 / size) if size > 0 else self.direction)
        return rows

    def _place(self, index):
        u = self.geom.y_unit.scale(self.a[index]).axpy(self.t[index], self.row_directions[index[0]])
        self.fields[index] = u
        self.levels[index] = functional_value(u, self.nl)

    def deformed(self, direction: FourierField) -> "PolarMesh":
        """
        A copy with every free node re-placed along `direction` (unit, zero-mean).
        """
        mesh = copy.copy(self)
        mesh.direction = direction
        mesh.row_directions = mesh._row_directions()
        mesh.fields = dict(self.fields)
        mesh.levels = self.levels.copy()
        for index in np.ndindex(self.a.shape):
            if not self.pinned[index]:
                mesh._place(index)
        return mesh

    def ranked(self, free_only: bool = False) -> list:
        """
        Node indices by decreasing level; ties broken by the lowest (|a|, t).
        """
        indices = [index for index in np.ndindex(self.a.shape) if not (free_only and self.pinned[index])]
        return sorted(indices, key=lambda index: (-self.levels[index], abs(self.a[index]), self.t[index]))

    @property
    def top(self) -> tuple:
        return self.ranked()[0]

    @property
    def max_level(self) -> float:
        return float(np.max(self.levels))


def normal_descent(mesh: PolarMesh, index) -> tuple:
    """
    (d, slope) at node `index`: the preconditioned steepest-descent direction with its Y part
    and its component along the node's mesh direction removed; slope = <J'(u), d> = -‖d‖².
    """
    u = mesh.fields[index]
    params = u.params
    gradient = functional_gradient(u, mesh.nl)
    coeffs = -gradient.coeffs / (params.kappa * params.dual_weight)
    coeffs[params.zero_index] = 0.0
    d = gradient.with_coeffs(coeffs)
    tangent = mesh.row_directions[index[0]]
    d = d.axpy(-inner(d, tangent), tangent)
    return d, pairing(gradient, d)


def relax_mesh(mesh: PolarMesh, options: SolverOptions) -> tuple:
    """
    Deforms the mesh as one surface. Each sweep turns the direction e by the normal descent step
    taken at the highest node, renormalizes it and re-places every free node; the sweep is kept
    only when the max over the mesh drops by the Armijo margin.

    Returns (mesh, history, peaks): the relaxed mesh, the nonincreasing (sweep, max level) pairs
    and the highest field after each accepted sweep.
    """
    current = mesh.max_level
    history = [(0, current)]
    peaks = []
    for sweep in range(1, options.max_sweeps + 1):
        top = mesh.top
        if mesh.pinned[top]:
            logger.info("Mesh sweep %d: max sits on M₀, stopping at level %.10g", sweep, current)
            break
        height = mesh.t[top]
        d, slope = normal_descent(mesh, top)
        size = norm(d)
        if not size > 0:
            break

        step = min(1.0, MAX_TURN * height / size)
        accepted = None
        while step >= MIN_STEP:
            turned = mesh.direction.axpy(step / height, d)
            trial = mesh.deformed(turned.scale(1.0 / norm(turned)))
            if trial.max_level <= current + ARMIJO * step * slope:
                accepted = trial
                break
            step *= 0.5
        if accepted is None:
            logger.info("Mesh sweep %d: no step lowers the max below %.10g", sweep, current)
            break

        decrease = current - accepted.max_level
        mesh = accepted
        current = mesh.max_level
        history.append((sweep, current))
        peaks.append(mesh.fields[mesh.top])
        logger.info("Mesh sweep %d: max level %.10g (step %.3g, |d| %.3e)", sweep, current, step, size)
        if decrease < options.level_tol * (1.0 + abs(current)):
            break
    return mesh, tuple(history), peaks


def minmax_search(geom: LinkingGeometry, nl: Nonlinearity, options: SolverOptions = None) -> MinMaxResult:
    """
    Relaxes the pinned mesh over M, then polishes peak fields with `refine`: the peaks of the
    latest accepted sweeps first, the unrelaxed max last. A refined point whose level falls below
    b_m has left the linking level and is rejected.

    A maximum on M₀ means no deformation lowers the path below its boundary values: the case is
    flagged degenerate and only that node is refined.
    """
    options = options or SolverOptions.from_settings()
    mesh = PolarMesh(geom, nl, options)
    initial_max = mesh.max_level
    start = mesh.fields[mesh.top]
    degenerate = bool(mesh.pinned[mesh.top])
    bracket = (geom.b_m, initial_max)

    if degenerate:
        logger.warning("Max over the path sits on M₀ (level %.6g); linking is degenerate", initial_max)
        history = ((0, initial_max),)
        candidates = [start]
    else:
        _, history, peaks = relax_mesh(mesh, options)
        candidates = peaks[::-1][: max(1, options.retries)] + [start]

    fallback = None
    last_error = None
    for candidate in candidates:
        try:
            result = refine(candidate, nl, options=options)
        except SolverError as exc:
            logger.warning("Refine from a level-%.6g peak failed: %s", functional_value(candidate, nl), exc)
            last_error = exc
            continue
        converged = result.residual < options.cerami_tol and result.alpha >= geom.b_m - options.level_tol
        result = replace(result, path_history=history, converged=converged, degenerate=degenerate, bracket=bracket)
        if converged:
            return result
        logger.warning("Refined level %.6g is below b_m=%.6g; trying the next peak", result.alpha, geom.b_m)
        fallback = fallback or result

    if fallback is not None:
        return fallback
    if degenerate and isinstance(last_error, ConvergedToTrivial):
        raise last_error
    raise StagnationWithoutConvergence(level=history[-1][1], b_m=geom.b_m) from last_error
