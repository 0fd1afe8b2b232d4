"""
Value types for band-limited T-periodic functions.

FourierField stores the dense coefficient block c_k, |k|∞ <= K, in the orthonormal
convention u = Σ c_k e^{iωk·x} / sqrt(T^N). Entry [k_1+K, ..., k_N+K] holds c_k.
"""

from dataclasses import dataclass, field

import numpy as np

from core.exceptions import InvalidField, NonHermitian
from spectral.params import ProblemParams

HERMITIAN_RTOL = 1e-12


def reflect(coeffs: np.ndarray) -> np.ndarray:
    """
    conj(c_{-k}) laid out at index k.
    """
    return np.conj(np.flip(coeffs))


def is_hermitian(coeffs: np.ndarray) -> bool:
    scale = max(1.0, float(np.max(np.abs(coeffs), initial=0.0)))
    return bool(np.max(np.abs(coeffs - reflect(coeffs)), initial=0.0) <= HERMITIAN_RTOL * scale)


@dataclass(frozen=True, eq=False)
class FourierField:
    params: ProblemParams
    coeffs: np.ndarray
    real: bool = True

    def __post_init__(self):
        coeffs = np.array(self.coeffs, dtype=np.complex128, copy=True)
        if coeffs.shape != self.params.shape:
            raise InvalidField(expected=self.params.shape, got=coeffs.shape)
        if self.real and not is_hermitian(coeffs):
            raise NonHermitian()
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)

    # --- access ---

    def coefficient(self, k) -> complex:
        k = tuple(int(i) for i in k)
        if len(k) != self.params.dim or max(abs(i) for i in k) > self.params.cutoff:
            return 0j
        return complex(self.coeffs[tuple(i + self.params.cutoff for i in k)])

    def entries(self):
        """
        Yields (k, c_k) for the nonzero coefficients in lexicographic order of k.
        """
        K = self.params.cutoff
        for index in zip(*np.nonzero(self.coeffs)):
            yield tuple(int(i) - K for i in index), complex(self.coeffs[index])

    @property
    def mean_coefficient(self) -> complex:
        return complex(self.coeffs[self.params.zero_index])

    # --- linear structure ---

    def with_coeffs(self, coeffs: np.ndarray, real: bool = None) -> "FourierField":
        return FourierField(self.params, coeffs, self.real if real is None else real)

    def with_params(self, params: ProblemParams) -> "FourierField":
        """
        Same coefficients viewed under other parameters with the same cutoff.
        """
        return FourierField(params, self.coeffs, self.real)

    def __add__(self, other: "FourierField") -> "FourierField":
        return FourierField(self.params, self.coeffs + other.coeffs, self.real and other.real)

    def __sub__(self, other: "FourierField") -> "FourierField":
        return FourierField(self.params, self.coeffs - other.coeffs, self.real and other.real)

    def __neg__(self) -> "FourierField":
        return FourierField(self.params, -self.coeffs, self.real)

    def scale(self, factor: float) -> "FourierField":
        factor = float(factor)
        return FourierField(self.params, factor * self.coeffs, self.real)

    def axpy(self, factor: float, other: "FourierField") -> "FourierField":
        """
        self + factor * other.
        """
        return FourierField(self.params, self.coeffs + float(factor) * other.coeffs, self.real and other.real)


@dataclass(frozen=True, eq=False)
class GridField:
    """
    Samples at x_j = jT/M, j in {0..M-1}^N.
    """

    params: ProblemParams
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.array(self.values, copy=True)
        expected = (self.params.grid,) * self.params.dim
        if values.shape != expected:
            raise InvalidField(expected=expected, got=values.shape)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def spacing(self) -> float:
        return self.params.period / self.params.grid

    def points(self) -> tuple:
        return grid_points(self.params.period, self.params.grid, self.params.dim)


def grid_points(period: float, points: int, dim: int) -> tuple:
    """
    Coordinate arrays (one per axis, 'ij' indexing) of the uniform grid.
    """
    axis = np.arange(points) * (period / points)
    return tuple(np.meshgrid(*([axis] * dim), indexing="ij"))
