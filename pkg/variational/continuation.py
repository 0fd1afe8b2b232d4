"""
Mass continuation m -> 0 with levels bracketed uniformly below m₀ = ω^{2s}/2.
"""

import logging
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import optimize

from core.exceptions import InvalidParams, LevelOutOfBounds, SolverError, TrivialLimit
from extension.services import ExtensionField, extend, extension_energy, gradient_energy, strip_bound_check
from spectral.fields import FourierField
from spectral.params import ProblemParams
from spectral.services import evaluate_on_grid, hs_norm, l2_norm, quadrature, seminorm
from variational.embedding import hy_constant
from variational.functional import dual_norm, functional_gradient, functional_value
from variational.hypotheses import bound_constant, growth_constant
from variational.linking import build_geometry, geometry_constant, minmax_search
from variational.nonlinearities import Nonlinearity
from variational.refine import MinMaxResult, SolverOptions, refine

logger = logging.getLogger(__name__)

__all__ = [
    "ContinuationBounds",
    "ContinuationReport",
    "bounds",
    "hy_constant",
    "nontriviality_floor",
    "norm_bounds",
    "run_continuation",
    "strip_bound_check",
]

# the limit equation is polished with this many extra Newton steps at most
LIMIT_ITERATIONS = 40
BOUND_TOL = 1e-10


@dataclass(frozen=True)
class ContinuationBounds:
    m0: float
    K1: float
    K2: float
    b: float
    Cpp: float
    A: float
    B_A: float
    epsilon: float
    C_eps: float
    C_bar: float

    def contains(self, level: float, tol: float) -> bool:
        return self.K1 - tol <= level <= self.K2 + tol


def bounds(params: ProblemParams, nl: Nonlinearity) -> ContinuationBounds:
    """
    K₁ <= α_m <= K₂ for every 0 < m <= m₀, from ε = ω^{2s}/8 (so b = 1/8) and A = C̄(m₀)/κ.
    """
    p = nl.exponent
    kappa = params.kappa
    omega_power = params.omega ** (2.0 * params.order)
    m0 = params.mass_threshold

    epsilon = omega_power / 8.0
    b = 0.25 - epsilon / omega_power
    cpp = hy_constant(params, p + 1.0)
    c_eps = growth_constant(nl, epsilon)
    upper = kappa * c_eps * cpp ** (p + 1.0)
    if upper > 0:
        k1 = 0.5 * b * (b / (2.0 * upper)) ** (2.0 / (p - 1.0))
    else:
        k1 = math.inf

    c_bar = geometry_constant(params.with_mass(m0))
    amplitude = c_bar / kappa
    b_a = bound_constant(nl, amplitude)
    k2 = kappa * b_a * params.volume

    if not k1 <= k2:
        logger.warning("Level bracket is empty for %s: K1=%.6g > K2=%.6g", nl.label, k1, k2)
    return ContinuationBounds(
        m0=m0, K1=k1, K2=k2, b=b, Cpp=cpp, A=amplitude, B_A=b_a, epsilon=epsilon, C_eps=c_eps, C_bar=c_bar
    )


@dataclass(frozen=True)
class NormBoundsReport:
    gradient_energy: float
    energy: float
    seminorm: float
    seminorm_bound: float
    l2_side: float
    trace_energy: float
    gradient_ok: bool
    seminorm_ok: bool
    l2_ok: bool

    @property
    def holds(self) -> bool:
        return self.gradient_ok and self.seminorm_ok and self.l2_ok


def norm_bounds(v: ExtensionField, nl: Nonlinearity) -> NormBoundsReport:
    """
    Along the run: ‖∇v‖² <= ‖v‖², [u]_H <= κ_s^{-1/2}‖v‖ and κ(2|u|²_{L²} - 2B₁T^N) <= κ|u|²_H,
    with B₁ the bound constant at A = 1.
    """
    params = v.params
    u = v.trace
    energy = extension_energy(v)
    gradient = gradient_energy(v)
    semi = seminorm(u)
    semi_bound = math.sqrt(energy / params.kappa_s)
    b_one = bound_constant(nl, 1.0)
    l2_side = params.kappa * (2.0 * l2_norm(u) ** 2 - 2.0 * b_one * params.volume)
    trace_energy = params.kappa * hs_norm(u) ** 2
    scale = 1.0 + energy
    return NormBoundsReport(
        gradient_energy=gradient,
        energy=energy,
        seminorm=semi,
        seminorm_bound=semi_bound,
        l2_side=l2_side,
        trace_energy=trace_energy,
        gradient_ok=bool(gradient <= energy + BOUND_TOL * scale),
        seminorm_ok=bool(semi <= semi_bound + BOUND_TOL * scale),
        l2_ok=bool(l2_side <= trace_energy + BOUND_TOL * scale),
    )


def lebesgue_norm(u: FourierField, q: float, points: int) -> float:
    """
    |u|_{L^q} from samples on a grid of `points` per axis.
    """
    values = evaluate_on_grid(u, points)
    return quadrature(u.params, np.abs(values) ** q) ** (1.0 / q)


def nontriviality_floor(params: ProblemParams, nl: Nonlinearity, level_bounds: ContinuationBounds) -> float:
    """
    Positive root X of κ(T^{N(p-1)/(p+1)} X² + (p+3) C_{1/4} X^{p+1}) = 2K₁; the limit must have
    |u₀|_{L^{p+1}} >= X.
    """
    p = nl.exponent
    holder = params.volume ** ((p - 1.0) / (p + 1.0))
    c_quarter = growth_constant(nl, 0.25)
    target = 2.0 * level_bounds.K1
    if not math.isfinite(target):
        return math.inf

    def excess(x):
        return params.kappa * (holder * x * x + (p + 3.0) * c_quarter * x ** (p + 1.0)) - target

    upper = 1.0
    while excess(upper) < 0:
        upper *= 2.0
    return float(optimize.brentq(excess, 0.0, upper, xtol=1e-14, rtol=1e-12))


@dataclass(frozen=True, eq=False)
class ContinuationStep:
    mass: float
    result: MinMaxResult
    norms: NormBoundsReport
    warm: bool
    lp_norm: float
    above_floor: bool

    @property
    def alpha(self) -> float:
        return self.result.alpha


@dataclass(frozen=True, eq=False)
class ContinuationReport:
    schedule: tuple
    bounds: ContinuationBounds
    steps: tuple
    limit: FourierField
    limit_residual: float
    limit_l2: float
    limit_lp: float
    floor: float

    @property
    def levels(self) -> tuple:
        return tuple(step.alpha for step in self.steps)


def validate_schedule(schedule, m0: float) -> tuple:
    schedule = tuple(float(m) for m in schedule)
    if not schedule:
        raise InvalidParams("continuation schedule is empty")
    if any(m <= 0 for m in schedule):
        raise InvalidParams("schedule values must be positive", schedule=schedule)
    if any(b >= a for a, b in zip(schedule, schedule[1:])):
        raise InvalidParams("schedule must be strictly decreasing", schedule=schedule)
    if schedule[0] > m0 * (1.0 + 1e-12):
        raise InvalidParams("schedule must stay at or below m0", first=schedule[0], m0=m0)
    return schedule


def _solve_at(params, nl, previous, options, warm_start, level_bounds) -> tuple:
    if warm_start and previous is not None:
        try:
            result = refine(previous.with_params(params), nl, options=options)
        except SolverError as exc:
            logger.warning("Warm start at m=%g failed (%s); falling back to the min-max search", params.mass, exc)
        else:
            if level_bounds.contains(result.alpha, options.level_tol):
                return result, True
            logger.warning(
                "Warm start at m=%g left [K1, K2] at level %.6g; searching again", params.mass, result.alpha
            )
    geometry = build_geometry(params, nl)
    return minmax_search(geometry, nl, options), False


def polish_limit(u: FourierField, nl: Nonlinearity, options: SolverOptions) -> MinMaxResult:
    """
    Newton polish of the last iterate for (-Δ)^s u = f(x, u) at m = 0.
    """
    limit_options = replace(options, max_iterations=max(options.max_iterations, LIMIT_ITERATIONS))
    return refine(u, nl, options=limit_options)


def run_continuation(
    template: ProblemParams,
    nl: Nonlinearity,
    schedule,
    tol: float = None,
    options: SolverOptions = None,
    warm_start: bool = True,
) -> ContinuationReport:
    options = options or SolverOptions.from_settings()
    if tol is not None:
        options = replace(options, cerami_tol=tol)
    level_bounds = bounds(template, nl)
    schedule = validate_schedule(schedule, level_bounds.m0)
    logger.info(
        "Continuation for %s: K1=%.6g K2=%.6g over %d masses",
        nl.label,
        level_bounds.K1,
        level_bounds.K2,
        len(schedule),
    )

    p = nl.exponent
    limit_params = template.with_mass(0.0)
    # the floor only uses α_m >= K₁ and the critical-point identity, so it binds every step
    floor = nontriviality_floor(limit_params, nl, level_bounds)

    steps = []
    previous = None
    for mass in schedule:
        params = template.with_mass(mass)
        result, warm = _solve_at(params, nl, previous, options, warm_start, level_bounds)
        if not level_bounds.contains(result.alpha, options.level_tol):
            raise LevelOutOfBounds(mass=mass, alpha=result.alpha, K1=level_bounds.K1, K2=level_bounds.K2)
        norms = norm_bounds(extend(result.candidate), nl)
        if not norms.holds:
            logger.warning("Norm bounds fail at m=%g: %s", mass, norms)
        lp = lebesgue_norm(result.candidate, p + 1.0, params.padded_grid(p))
        if lp < floor:
            logger.warning("m=%g: |u|_{p+1}=%.6g is below the nontriviality floor %.6g", mass, lp, floor)
        step = ContinuationStep(
            mass=mass, result=result, norms=norms, warm=warm, lp_norm=lp, above_floor=bool(lp >= floor)
        )
        steps.append(step)
        logger.info("m=%g: alpha=%.10g cerami=%.3e warm=%s", mass, result.alpha, result.residual, warm)
        previous = result.candidate

    polished = polish_limit(previous.with_params(limit_params), nl, options)
    u0 = polished.candidate
    residual = dual_norm(functional_gradient(u0, nl), options.dual)

    limit_lp = lebesgue_norm(u0, p + 1.0, limit_params.padded_grid(p))
    if limit_lp < floor:
        raise TrivialLimit(norm=limit_lp, floor=floor)
    logger.info(
        "Limit m=0: J=%.10g residual=%.3e |u|_{p+1}=%.6g (floor %.6g)",
        functional_value(u0, nl),
        residual,
        limit_lp,
        floor,
    )
    return ContinuationReport(
        schedule=schedule,
        bounds=level_bounds,
        steps=tuple(steps),
        limit=u0,
        limit_residual=residual,
        limit_l2=l2_norm(u0),
        limit_lp=limit_lp,
        floor=floor,
    )
