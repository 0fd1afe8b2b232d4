"""
Problem parameters shared by every multiplier, norm and solver.
"""

import math
from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np
from scipy.special import gamma

from core.exceptions import InvalidParams, OrderOutOfRange

KAPPA_EXPLICIT = "explicit"
KAPPA_NORMALIZED = "normalized"
KAPPA_MODES = (KAPPA_EXPLICIT, KAPPA_NORMALIZED)


def kappa_constant(order: float) -> float:
    """
    2^{1-2s} Γ(1-s) / Γ(s): energy of the Bessel profile and its conormal derivative at 0.
    """
    if not 0.0 < order < 1.0:
        raise OrderOutOfRange(order=order)
    return float(2.0 ** (1.0 - 2.0 * order) * gamma(1.0 - order) / gamma(order))


@dataclass(frozen=True)
class ProblemParams:
    """
    N, T, s, m plus the discretization (cutoff K per axis, M grid samples per axis).

    kappa_mode="normalized" drops κ_s from the functional and the extension norm,
    "explicit" keeps it everywhere.
    """

    dim: int
    period: float
    order: float
    mass: float
    cutoff: int
    grid: int
    kappa_mode: str = KAPPA_EXPLICIT

    def __post_init__(self):
        if self.dim < 1:
            raise InvalidParams("dimension must be positive", dim=self.dim)
        if not self.period > 0:
            raise InvalidParams("period must be positive", period=self.period)
        if not 0.0 < self.order < 1.0:
            raise OrderOutOfRange(order=self.order)
        if self.mass < 0:
            raise InvalidParams("mass must be nonnegative", mass=self.mass)
        if self.cutoff < 1:
            raise InvalidParams("cutoff must be positive", cutoff=self.cutoff)
        if self.grid < 2 * self.cutoff + 2:
            raise InvalidParams("grid must satisfy M >= 2K + 2", grid=self.grid, cutoff=self.cutoff)
        if self.kappa_mode not in KAPPA_MODES:
            raise InvalidParams("unknown kappa mode", kappa_mode=self.kappa_mode)

    # --- derived scalars ---

    @property
    def omega(self) -> float:
        return 2.0 * math.pi / self.period

    @property
    def volume(self) -> float:
        return self.period**self.dim

    @property
    def kappa_s(self) -> float:
        return kappa_constant(self.order)

    @property
    def kappa(self) -> float:
        """
        The κ actually used by the functional and the extension norm.
        """
        return 1.0 if self.kappa_mode == KAPPA_NORMALIZED else self.kappa_s

    @property
    def mass_power(self) -> float:
        # same expression as the k = 0 symbol so the shifted symbol vanishes there exactly
        return (self.mass * self.mass) ** self.order

    @property
    def critical_exponent(self) -> float:
        """
        2♯_s = 2N/(N-2s); every L^q embedding holds when N <= 2s.
        """
        if self.dim <= 2 * self.order:
            return math.inf
        return 2.0 * self.dim / (self.dim - 2.0 * self.order)

    @property
    def shape(self) -> tuple:
        return (2 * self.cutoff + 1,) * self.dim

    @property
    def mass_threshold(self) -> float:
        """
        m₀ = ω^{2s}/2, the end of the uniform-in-m regime.
        """
        return self.omega ** (2 * self.order) / 2.0

    # --- wave-number tables (read-only, computed once per instance) ---

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """
        Integer multi-indices, shape (N, 2K+1, ..., 2K+1); axis i holds k_i.
        """
        axis = np.arange(-self.cutoff, self.cutoff + 1)
        grids = np.meshgrid(*([axis] * self.dim), indexing="ij")
        table = np.stack(grids)
        table.setflags(write=False)
        return table

    @cached_property
    def k_squared(self) -> np.ndarray:
        table = np.sum(self.wavenumbers.astype(float) ** 2, axis=0)
        table.setflags(write=False)
        return table

    @cached_property
    def eigenvalues(self) -> np.ndarray:
        """
        λ_k = sqrt(ω²|k|² + m²), the decay rate of mode k into the cylinder.
        """
        table = np.sqrt(self.omega**2 * self.k_squared + self.mass**2)
        table.setflags(write=False)
        return table

    @cached_property
    def symbol(self) -> np.ndarray:
        table = (self.omega**2 * self.k_squared + self.mass * self.mass) ** self.order
        table.setflags(write=False)
        return table

    @cached_property
    def shifted_symbol(self) -> np.ndarray:
        table = self.symbol - self.mass_power
        table[self.zero_index] = 0.0
        table.setflags(write=False)
        return table

    @cached_property
    def seminorm_symbol(self) -> np.ndarray:
        table = (self.omega**2 * self.k_squared) ** self.order
        table.setflags(write=False)
        return table

    @cached_property
    def dual_weight(self) -> np.ndarray:
        """
        Symbol used to measure gradients in the dual norm; the massless k = 0 entry is replaced by 1.
        """
        table = np.array(self.symbol, copy=True)
        if table[self.zero_index] == 0.0:
            table[self.zero_index] = 1.0
        table.setflags(write=False)
        return table

    @property
    def zero_index(self) -> tuple:
        return (self.cutoff,) * self.dim

    # --- copies ---

    def with_mass(self, mass: float) -> "ProblemParams":
        return replace(self, mass=mass)

    def padded_grid(self, exponent: float) -> int:
        """
        Grid size that de-aliases a nonlinearity of growth `exponent`: ceil((p+1)M/2), never below M.
        """
        return max(self.grid, math.ceil((exponent + 1.0) * self.grid / 2.0))

    def as_dict(self) -> dict:
        return {
            "N": self.dim,
            "T": self.period,
            "s": self.order,
            "m": self.mass,
            "K": self.cutoff,
            "M": self.grid,
            "kappa_mode": self.kappa_mode,
        }
