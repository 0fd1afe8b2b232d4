"""
The energy functional on the trace side and its derivatives.

J(u) = κ [ ½ Σ ((ω²|k|²+m²)^s - m^{2s}) |c_k|² - ∫ F(x, u) dx ]

with κ = κ_s (explicit mode) or 1 (normalized mode). Nonlinear terms are evaluated on the
zero-padded grid and projected back, so the gradient is the exact derivative of the discrete J.
"""

import numpy as np

from spectral.fields import FourierField, grid_points
from spectral.services import (
    analyze,
    evaluate_on_grid,
    hs_norm,
    project_from_grid,
    quadrature,
    shifted_form,
    synthesize,
)
from variational.nonlinearities import Nonlinearity

DUAL = "dual"
L2 = "l2"


def _padded(u: FourierField, nl: Nonlinearity) -> tuple:
    """
    (coords, samples) of u on the grid that de-aliases growth of order p.
    """
    params = u.params
    points = params.padded_grid(nl.exponent)
    coords = grid_points(params.period, points, params.dim)
    return coords, evaluate_on_grid(u, points)


def integrate_on_grid(u: FourierField, nl: Nonlinearity, func) -> float:
    """
    ∫ func(nl, coords, u(x)) dx on the padded grid.
    """
    coords, values = _padded(u, nl)
    return quadrature(u.params, func(nl, coords, values))


def primitive_integral(u: FourierField, nl: Nonlinearity) -> float:
    return integrate_on_grid(u, nl, lambda n, x, t: n.F(x, t))


def excess_integral(u: FourierField, nl: Nonlinearity) -> float:
    """
    ∫ G(x, u) dx with G = f t - 2F.
    """
    return integrate_on_grid(u, nl, lambda n, x, t: n.G(x, t))


def nonlinear_coefficients(u: FourierField, nl: Nonlinearity) -> FourierField:
    """
    Truncated Fourier coefficients of f(·, u).
    """
    coords, values = _padded(u, nl)
    return FourierField(u.params, project_from_grid(u.params, nl.f(coords, values)))


def functional_value(u: FourierField, nl: Nonlinearity) -> float:
    params = u.params
    return params.kappa * (0.5 * shifted_form(u) - primitive_integral(u, nl))


def quadratic_part(u: FourierField) -> float:
    """
    κ[|u|²_H - m^{2s}|u|²_{L²}], zero exactly on constants.
    """
    return u.params.kappa * shifted_form(u)


def functional_gradient(u: FourierField, nl: Nonlinearity) -> FourierField:
    """
    J'(u) represented against the L² pairing: κ(σ_shift c - P f(·,u)).
    """
    params = u.params
    linear = u.coeffs * params.shifted_symbol
    nonlinear = nonlinear_coefficients(u, nl).coeffs
    return FourierField(params, params.kappa * (linear - nonlinear))


def slope_on_grid(u: FourierField, nl: Nonlinearity) -> np.ndarray:
    coords, values = _padded(u, nl)
    return nl.f_t(coords, values)


def hessian_apply(u: FourierField, nl: Nonlinearity, h: np.ndarray, weight: np.ndarray = None) -> np.ndarray:
    """
    J''(u)h on a raw coefficient block (complex, not necessarily Hermitian).
    `weight` is f_t(x, u) on the padded grid; pass it when applying repeatedly at one u.
    """
    params = u.params
    if weight is None:
        weight = slope_on_grid(u, nl)
    h_values = synthesize(params, h, weight.shape[0])
    product = analyze(params, weight * h_values)
    return params.kappa * (params.shifted_symbol * h - product)


def dual_norm(g: FourierField, dual: str = DUAL) -> float:
    """
    (Σ |g_k|² / σ_k)^{1/2} with σ the unshifted symbol; the raw coefficient norm when dual="l2".
    """
    squared = np.abs(g.coeffs) ** 2
    if dual == L2:
        return float(np.sqrt(np.sum(squared)))
    return float(np.sqrt(np.sum(squared / g.params.dual_weight)))


def cerami_measure(u: FourierField, nl: Nonlinearity, dual: str = DUAL) -> tuple:
    """
    (J(u), (1 + |u|_H) ‖J'(u)‖).
    """
    level = functional_value(u, nl)
    gradient = functional_gradient(u, nl)
    return level, (1.0 + hs_norm(u)) * dual_norm(gradient, dual)
