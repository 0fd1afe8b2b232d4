"""
Finite-difference check of the extension, one Fourier mode at a time.

Each mode of the cylinder problem reduces to -(ξ^{1-2s} w')' + λ² ξ^{1-2s} w = 0 on (0, Ξ)
with w(0) = 1, w(Ξ) = 0. The scheme is flux conservative: face conductances are the exact
harmonic averages of the weight, so no Bessel function enters the computation.
"""

import logging
import math
from dataclasses import dataclass, replace

import numpy as np
from django.conf import settings
from scipy.linalg import LinAlgError, solve_banded

from core.exceptions import InvalidParams, OrderOutOfRange, SingularSystem
from extension.richardson import extrapolate_to_boundary
from spectral.params import kappa_constant

logger = logging.getLogger(__name__)

DECAY_LENGTHS = 30.0
MIN_NODES = 16


@dataclass(frozen=True)
class ModeProblem:
    lam: float
    order: float
    height: float = None
    nodes: int = 256
    grading: float = 2.0

    def __post_init__(self):
        if not self.lam > 0:
            raise InvalidParams("decay rate must be positive", lam=self.lam)
        if not 0.0 < self.order < 1.0:
            raise OrderOutOfRange(order=self.order)
        if self.nodes < MIN_NODES:
            raise InvalidParams("at least 16 cells are required", nodes=self.nodes)
        if self.grading < 1.0:
            raise InvalidParams("grading exponent must be at least 1", grading=self.grading)
        if self.height is None:
            object.__setattr__(self, "height", DECAY_LENGTHS / self.lam)
        elif not self.height > 0:
            raise InvalidParams("height must be positive", height=self.height)

    @property
    def grid(self) -> np.ndarray:
        """
        ξ_j = Ξ (j/J)^β, clustered at the boundary.
        """
        return self.height * (np.arange(self.nodes + 1) / self.nodes) ** self.grading

    @property
    def expected_symbol(self) -> float:
        return kappa_constant(self.order) * self.lam ** (2.0 * self.order)

    def with_nodes(self, nodes: int) -> "ModeProblem":
        return replace(self, nodes=nodes)


def _conductances(mp: ModeProblem, xi: np.ndarray) -> np.ndarray:
    s = mp.order
    return 2.0 * s / np.diff(xi ** (2.0 * s))


def _reaction_masses(mp: ModeProblem, xi: np.ndarray) -> np.ndarray:
    """
    ∫ ξ^{1-2s} over the dual cell of each interior node.
    """
    s = mp.order
    midpoints = 0.5 * (xi[:-1] + xi[1:])
    power = midpoints ** (2.0 - 2.0 * s) / (2.0 - 2.0 * s)
    return np.diff(power)


def solve_mode(mp: ModeProblem) -> np.ndarray:
    """
    Nodal values w_0..w_J of the discrete profile, w_0 = 1 and w_J = 0.
    """
    xi = mp.grid
    conductance = _conductances(mp, xi)
    mass = _reaction_masses(mp, xi)

    interior = mp.nodes - 1
    banded = np.zeros((3, interior))
    banded[1] = conductance[:-1] + conductance[1:] + mp.lam**2 * mass
    banded[0, 1:] = -conductance[1:-1]
    banded[2, :-1] = -conductance[1:-1]
    rhs = np.zeros(interior)
    rhs[0] = conductance[0]

    try:
        inner = solve_banded((1, 1), banded, rhs)
    except (LinAlgError, ValueError) as exc:
        raise SingularSystem(lam=mp.lam, order=mp.order, nodes=mp.nodes) from exc
    if not np.all(np.isfinite(inner)):
        raise SingularSystem(lam=mp.lam, order=mp.order, nodes=mp.nodes)

    return np.concatenate(([1.0], inner, [0.0]))


def face_fluxes(mp: ModeProblem, values: np.ndarray) -> tuple:
    """
    (heights, fluxes): the discrete -ξ^{1-2s}w' of every cell and the height it is exact at
    when the flux varies like F₀ - c ξ^{2-2s}.
    """
    s = mp.order
    xi = mp.grid
    fluxes = _conductances(mp, xi) * (values[:-1] - values[1:])
    heights = (s * np.diff(xi**2) / np.diff(xi ** (2.0 * s))) ** (1.0 / (2.0 - 2.0 * s))
    return heights, fluxes


def dtn_symbol(mp: ModeProblem, values: np.ndarray, cells: int = 3, tol: float = None) -> float:
    """
    Boundary flux of the discrete profile extrapolated to ξ = 0; approximates κ_s λ^{2s}.
    """
    tol = settings.LAB_DEFAULTS["probe_tol"] if tol is None else tol
    heights, fluxes = face_fluxes(mp, values)
    # decreasing heights, coarsest first
    probes = heights[:cells][::-1]
    samples = fluxes[:cells][::-1]
    return extrapolate_to_boundary(probes, samples, mp.order, tol=tol).limit


def _cell_moments(mp: ModeProblem, xi: np.ndarray) -> tuple:
    """
    (μ₀, μ₁, μ₂) per cell, μ_n = ∫ ξ^{1-2s} ξ^n over [ξ_j, ξ_{j+1}].
    """
    base = 2.0 - 2.0 * mp.order
    return tuple(np.diff(xi ** (base + n)) / (base + n) for n in range(3))


def discrete_energy(mp: ModeProblem, values: np.ndarray) -> float:
    """
    ∫ ξ^{1-2s} (w'² + λ² w²) of the piecewise-linear interpolant of the nodal values, integrated
    exactly cell by cell and extended by 0 beyond Ξ.

    The interpolant is an admissible competitor with w(0) = 1, so the value never falls below the
    minimum κ_s λ^{2s} and approaches it from above as the FD profile converges.
    """
    xi = mp.grid
    left, right = xi[:-1], xi[1:]
    width = right - left
    mu0, mu1, mu2 = _cell_moments(mp, xi)
    w_left, w_right = values[:-1], values[1:]

    gradient = ((w_right - w_left) / width) ** 2 * mu0
    # hat functions (ξ_{j+1} - ξ)/h and (ξ - ξ_j)/h against the weight
    left_left = (right**2 * mu0 - 2.0 * right * mu1 + mu2) / width**2
    right_right = (left**2 * mu0 - 2.0 * left * mu1 + mu2) / width**2
    cross = (-left * right * mu0 + (left + right) * mu1 - mu2) / width**2
    reaction = w_left**2 * left_left + 2.0 * w_left * w_right * cross + w_right**2 * right_right
    return float(np.sum(gradient) + mp.lam**2 * np.sum(reaction))


@dataclass(frozen=True)
class ConvergenceRow:
    nodes: int
    lam: float
    order: float
    symbol: float
    error: float
    rate: float = None

    def as_row(self) -> list:
        return [self.nodes, self.lam, self.order, self.symbol, self.error, self.rate]


CONVERGENCE_HEADER = ["J", "lambda", "s", "symbol", "error", "order"]


def convergence_study(template: ModeProblem, node_counts) -> list:
    """
    Relative error of the recovered symbol against κ_s λ^{2s} per J, with the observed order
    between consecutive rows.
    """
    rows = []
    expected = template.expected_symbol
    previous = None
    for nodes in node_counts:
        mp = template.with_nodes(int(nodes))
        symbol = dtn_symbol(mp, solve_mode(mp))
        error = abs(symbol - expected) / expected
        rate = None
        if previous is not None and previous.error > 0 and error > 0:
            rate = math.log(previous.error / error) / math.log(mp.nodes / previous.nodes)
        row = ConvergenceRow(nodes=mp.nodes, lam=mp.lam, order=mp.order, symbol=symbol, error=error, rate=rate)
        logger.info(
            "cylinder J=%d lambda=%g s=%g: symbol=%.10f error=%.3e", mp.nodes, mp.lam, mp.order, symbol, error
        )
        rows.append(row)
        previous = row
    return rows
