"""
Trace embedding constant into L^q for zero-mean fields, via Hausdorff-Young and Hölder.
"""

import logging
import math

import numpy as np
from scipy.special import gamma, zeta

from core.exceptions import DivergentSum
from spectral.params import ProblemParams

logger = logging.getLogger(__name__)

# cube half-widths for the explicit part of the lattice sum
LATTICE_TRUNCATION = {2: 500, 3: 60}
DEFAULT_TRUNCATION = 12


def sum_exponent(params: ProblemParams, q: float) -> tuple:
    """
    (q', e) with q' = q/(q-1) and e = 2sq'/(2-q'); DivergentSum unless 2 < q < 2♯ and e > N.
    """
    if not q > 2.0 or not q < params.critical_exponent:
        raise DivergentSum("q must lie strictly between 2 and the critical exponent", q=q)
    conjugate = q / (q - 1.0)
    exponent = 2.0 * params.order * conjugate / (2.0 - conjugate)
    if not exponent > params.dim:
        raise DivergentSum(q=q, exponent=exponent, dim=params.dim)
    return conjugate, exponent


def lattice_sum(dim: int, exponent: float) -> float:
    """
    Upper bound for Σ_{k≠0} |k|^{-e}: exact through ζ when N = 1, otherwise an explicit cube
    plus an integral bound on the rest.
    """
    if dim == 1:
        return float(2.0 * zeta(exponent))
    width = LATTICE_TRUNCATION.get(dim, DEFAULT_TRUNCATION)
    axis = np.arange(-width, width + 1, dtype=float)
    squared = np.zeros((1,) * dim)
    for i in range(dim):
        shape = [1] * dim
        shape[i] = axis.size
        squared = squared + axis.reshape(shape) ** 2
    squared = squared[squared > 0]
    head = float(np.sum(squared ** (-exponent / 2.0)))

    # every lattice point outside the cube owns a unit cell outside the ball of radius width + 1/2,
    # on which |x| <= |k| (1 + sqrt(N) / (2(width + 1)))
    radius = width + 0.5
    sphere = 2.0 * math.pi ** (dim / 2.0) / gamma(dim / 2.0)
    inflation = (1.0 + math.sqrt(dim) / (2.0 * (width + 1.0))) ** exponent
    tail = inflation * sphere * radius ** (dim - exponent) / (exponent - dim)
    return head + tail


def hy_constant(params: ProblemParams, q: float) -> float:
    """
    C'' with |u|_{L^q} <= C'' ‖u‖ for zero-mean u, where ‖u‖ = sqrt(κ) |u|_H.
    """
    conjugate, exponent = sum_exponent(params, q)
    total = lattice_sum(params.dim, exponent)
    sup_factor = params.period ** (-params.dim / 2.0)
    constant = (
        sup_factor ** (2.0 / conjugate - 1.0)
        * params.omega ** (-params.order)
        * params.kappa**-0.5
        * total ** ((2.0 - conjugate) / (2.0 * conjugate))
    )
    logger.debug("C'' at q=%g: lattice sum %.6g, constant %.6g", q, total, constant)
    return float(constant)
