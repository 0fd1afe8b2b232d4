"""
Extrapolation of conormal fluxes to the boundary ξ = 0.

Near the boundary the flux behaves like L + a η^{2-2s} + b η² + c η^{4-2s} + d η⁴ + ...,
so n probes fit L together with the first n-1 correction exponents.
"""

from dataclasses import dataclass

import numpy as np

from core.exceptions import ProbeTooCoarse


@dataclass(frozen=True)
class Extrapolation:
    limit: float
    residual: float
    exponents: tuple


def correction_exponents(order: float, count: int) -> tuple:
    exponents = []
    shift = 0.0
    while len(exponents) < count:
        exponents.extend([2.0 - 2.0 * order + shift, 2.0 + shift])
        shift += 2.0
    return tuple(exponents[:count])


def _fit_limit(heights: np.ndarray, values: np.ndarray, exponents: tuple) -> float:
    # heights are scaled by the coarsest probe so the columns stay O(1)
    scaled = heights / heights.max()
    columns = [np.ones_like(scaled)] + [scaled**e for e in exponents]
    matrix = np.column_stack(columns)
    solution = np.linalg.solve(matrix, values)
    return float(solution[0])


def validate_probes(probes) -> np.ndarray:
    probes = np.asarray(probes, dtype=float)
    if probes.ndim != 1 or probes.size < 3:
        raise ProbeTooCoarse("at least three probe heights are required", count=int(probes.size))
    if np.any(probes <= 0) or np.any(np.diff(probes) >= 0):
        raise ProbeTooCoarse("probe heights must be positive and strictly decreasing")
    return probes


def extrapolate_to_boundary(heights, values, order: float, tol: float = None) -> Extrapolation:
    """
    Limit of `values` as the (decreasing) `heights` go to 0.

    The residual is the change of the limit when the coarsest probe is dropped,
    relative to the limit. ProbeTooCoarse when it exceeds `tol`.
    """
    heights = validate_probes(heights)
    values = np.asarray(values, dtype=float)
    exponents = correction_exponents(order, heights.size - 1)
    full = _fit_limit(heights, values, exponents)
    reduced = _fit_limit(heights[1:], values[1:], exponents[:-1])
    residual = abs(full - reduced) / max(abs(full), np.finfo(float).tiny)
    if tol is not None and residual > tol:
        raise ProbeTooCoarse(limit=full, residual=residual, tol=tol)
    return Extrapolation(limit=full, residual=residual, exponents=exponents)
