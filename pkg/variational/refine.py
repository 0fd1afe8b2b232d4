"""
Polishing of min-max candidates into critical points by damped Newton-GMRES.
"""

import logging
from dataclasses import dataclass, fields

import numpy as np
from django.conf import settings
from scipy.sparse.linalg import LinearOperator, gmres

from core.exceptions import ConvergedToTrivial, MaxIterations
from extension.services import dtn_apply, extend
from spectral.fields import FourierField
from spectral.services import hs_norm, symmetrize, symmetrize_coeffs
from variational.functional import (
    DUAL,
    cerami_measure,
    functional_gradient,
    hessian_apply,
    nonlinear_coefficients,
    slope_on_grid,
)
from variational.nonlinearities import Nonlinearity

logger = logging.getLogger(__name__)

MIN_STEP = 2.0**-20


@dataclass(frozen=True)
class SolverOptions:
    cerami_tol: float = 1e-6
    max_iterations: int = 60
    trivial_floor: float = 1e-8
    gmres_rtol: float = 1e-10
    gmres_restart: int = 60
    gmres_maxiter: int = 200
    mesh_radial: int = 40
    mesh_angular: int = 40
    mesh_grading: float = 3.0
    max_sweeps: int = 150
    level_tol: float = 1e-9
    retries: int = 3
    dual: str = DUAL
    probe_tol: float = 1e-2

    @classmethod
    def from_settings(cls, **overrides) -> "SolverOptions":
        defaults = settings.LAB_DEFAULTS
        names = {item.name for item in fields(cls)}
        values = {key: value for key, value in defaults.items() if key in names}
        values.update({key: value for key, value in overrides.items() if value is not None})
        return cls(**values)


@dataclass(frozen=True, eq=False)
class MinMaxResult:
    """
    A candidate critical point with its level and Cerami measure.

    `path_history` holds (sweep, max-over-path level) pairs of the mesh relaxation and
    `trace` the (iteration, level, residual) rows of the Newton polish.
    """

    candidate: FourierField
    alpha: float
    residual: float
    path_history: tuple = ()
    converged: bool = False
    trace: tuple = ()
    iterations: int = 0
    degenerate: bool = False
    bracket: tuple = None


def _newton_direction(u: FourierField, nl: Nonlinearity, gradient: FourierField, options: SolverOptions):
    params = u.params
    size = u.coeffs.size
    weight = slope_on_grid(u, nl)
    preconditioner = (1.0 / (params.kappa * params.dual_weight)).ravel()

    def matvec(x):
        return hessian_apply(u, nl, np.reshape(x, params.shape), weight).ravel()

    hessian = LinearOperator((size, size), matvec=matvec, dtype=np.complex128)
    scaling = LinearOperator((size, size), matvec=lambda x: preconditioner * np.ravel(x), dtype=np.complex128)
    step, info = gmres(
        hessian,
        -gradient.coeffs.ravel(),
        rtol=options.gmres_rtol,
        restart=options.gmres_restart,
        maxiter=options.gmres_maxiter,
        M=scaling,
    )
    if info != 0:
        logger.debug("GMRES stopped early (info=%s); using the partial solution", info)
    return FourierField(params, symmetrize_coeffs(np.reshape(step, params.shape)))


def refine(candidate: FourierField, nl: Nonlinearity, tol: float = None, options: SolverOptions = None) -> MinMaxResult:
    """
    Damped Newton on J'(u) = 0, backtracking on the Cerami measure.

    Returns at once when the candidate already satisfies the tolerance. Raises ConvergedToTrivial
    when an iterate collapses below the trivial floor and MaxIterations when the budget runs out.
    """
    options = options or SolverOptions.from_settings()
    tol = options.cerami_tol if tol is None else tol

    u = symmetrize(candidate)
    level, residual = cerami_measure(u, nl, options.dual)
    trace = [(0, level, residual)]
    if residual < tol:
        return MinMaxResult(u, level, residual, converged=True, trace=tuple(trace))

    for iteration in range(1, options.max_iterations + 1):
        direction = _newton_direction(u, nl, functional_gradient(u, nl), options)

        step = 1.0
        while step >= MIN_STEP:
            trial = u.axpy(step, direction)
            trial_level, trial_residual = cerami_measure(trial, nl, options.dual)
            if trial_residual < residual:
                break
            step *= 0.5
        else:
            raise MaxIterations("line search found no decrease", iteration=iteration, residual=residual)

        u, level, residual = trial, trial_level, trial_residual
        trace.append((iteration, level, residual))
        logger.info("refine %d: level=%.10g cerami=%.3e step=%g", iteration, level, residual, step)

        norm = hs_norm(u)
        if norm < options.trivial_floor:
            raise ConvergedToTrivial(iteration=iteration, norm=norm)
        if residual < tol:
            return MinMaxResult(u, level, residual, converged=True, trace=tuple(trace), iterations=iteration)

    raise MaxIterations(iterations=options.max_iterations, residual=residual)


@dataclass(frozen=True)
class WeakSolutionReport:
    relative_error: float
    tol: float
    holds: bool


def weak_solution_check(
    u: FourierField, nl: Nonlinearity, tol: float = 1e-4, probes=None, probe_tol: float = None
) -> WeakSolutionReport:
    """
    Feeds u through the extension: the conormal derivative minus κ_s m^{2s} u must equal κ_s f(·, u).
    """
    params = u.params
    kappa_s = params.kappa_s
    conormal = dtn_apply(extend(u), probes=probes, tol=probe_tol).coeffs
    lhs = conormal - kappa_s * params.mass_power * u.coeffs
    rhs = kappa_s * nonlinear_coefficients(u, nl).coeffs
    scale = max(float(np.linalg.norm(rhs)), float(np.finfo(float).tiny))
    error = float(np.linalg.norm(lhs - rhs)) / scale
    return WeakSolutionReport(relative_error=error, tol=tol, holds=bool(error <= tol))
