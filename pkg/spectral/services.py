"""
Service layer for the torus spectral toolkit.
Handles grid <-> coefficient transforms, the multiplier operator and its norms.
"""

import logging

import numpy as np
from scipy import fft

from core.exceptions import InvalidExponent, NonHermitian
from spectral.fields import FourierField, GridField, grid_points, is_hermitian, reflect
from spectral.params import ProblemParams

logger = logging.getLogger(__name__)


# --- raw transforms on an arbitrary grid size ---


def _retained(params: ProblemParams, points: int) -> tuple:
    index = np.arange(-params.cutoff, params.cutoff + 1) % points
    return np.ix_(*([index] * params.dim))


def synthesize(params: ProblemParams, coeffs: np.ndarray, points: int) -> np.ndarray:
    """
    Σ c_k e^{iωk·x_j} / sqrt(T^N) on a grid of `points` samples per axis (complex result).
    """
    spectrum = np.zeros((points,) * params.dim, dtype=np.complex128)
    spectrum[_retained(params, points)] = coeffs
    return fft.ifftn(spectrum) * (points**params.dim / np.sqrt(params.volume))


def analyze(params: ProblemParams, values: np.ndarray) -> np.ndarray:
    """
    Trapezoidal quadrature of c_k = T^{-N/2} ∫ u e^{-iωk·x} dx for |k|∞ <= K.
    """
    points = values.shape[0]
    spectrum = fft.fftn(values)
    return spectrum[_retained(params, points)] * (np.sqrt(params.volume) / points**params.dim)


def symmetrize_coeffs(coeffs: np.ndarray) -> np.ndarray:
    return 0.5 * (coeffs + reflect(coeffs))


def evaluate_on_grid(u: FourierField, points: int) -> np.ndarray:
    """
    Real samples of u on a (typically padded) grid of `points` per axis.
    """
    if not u.real and not is_hermitian(u.coeffs):
        raise NonHermitian()
    return np.real(synthesize(u.params, u.coeffs, points))


def project_from_grid(params: ProblemParams, values: np.ndarray) -> np.ndarray:
    """
    Truncated, Hermitian-symmetrized coefficients of real samples on any grid size >= 2K+1.
    """
    return symmetrize_coeffs(analyze(params, values))


def quadrature(params: ProblemParams, values: np.ndarray) -> float:
    """
    ∫_{(0,T)^N} g dx by the uniform rule on the grid `values` lives on.
    """
    points = values.shape[0]
    return float(np.sum(values) * (params.period / points) ** params.dim)


# --- public operations ---


def to_fourier(g: GridField) -> FourierField:
    coeffs = analyze(g.params, g.values)
    real = not np.iscomplexobj(g.values)
    if real:
        coeffs = symmetrize_coeffs(coeffs)
    return FourierField(g.params, coeffs, real=real)


def to_grid(u: FourierField, real: bool = True) -> GridField:
    values = synthesize(u.params, u.coeffs, u.params.grid)
    if real:
        if not u.real and not is_hermitian(u.coeffs):
            raise NonHermitian()
        values = np.real(values)
    return GridField(u.params, values)


def apply_operator(u: FourierField, shift: bool = False) -> FourierField:
    symbol = u.params.shifted_symbol if shift else u.params.symbol
    return u.with_coeffs(u.coeffs * symbol)


def hs_norm(u: FourierField) -> float:
    return float(np.sqrt(np.sum(u.params.symbol * np.abs(u.coeffs) ** 2)))


def seminorm(u: FourierField) -> float:
    """
    [u]² = Σ ω^{2s}|k|^{2s}|c_k|².
    """
    return float(np.sqrt(np.sum(u.params.seminorm_symbol * np.abs(u.coeffs) ** 2)))


def l2_norm(u: FourierField) -> float:
    return float(np.sqrt(np.sum(np.abs(u.coeffs) ** 2)))


def shifted_form(u: FourierField) -> float:
    """
    Σ [(ω²|k|²+m²)^s − m^{2s}] |c_k|², nonnegative with equality iff only c_0 is present.
    """
    return float(np.sum(u.params.shifted_symbol * np.abs(u.coeffs) ** 2))


def pairing(g: FourierField, h: FourierField) -> float:
    """
    Re Σ g_k conj(h_k), the L² pairing of two real fields.
    """
    return float(np.real(np.vdot(h.coeffs, g.coeffs)))


def lq_norm(g: GridField, q: float) -> float:
    if not q >= 1:
        raise InvalidExponent(q=q)
    magnitude = np.abs(g.values)
    if np.isinf(q):
        return float(np.max(magnitude, initial=0.0))
    return quadrature(g.params, magnitude**q) ** (1.0 / q)


# --- constructors ---


def zero_field(params: ProblemParams) -> FourierField:
    return FourierField(params, np.zeros(params.shape, dtype=np.complex128))


def single_mode(params: ProblemParams, k, amplitude: complex = 1.0, real: bool = False) -> FourierField:
    """
    c_k = amplitude; with real=True also c_{-k} = conj(amplitude).
    """
    coeffs = np.zeros(params.shape, dtype=np.complex128)
    index = tuple(int(i) + params.cutoff for i in k)
    coeffs[index] = amplitude
    if real:
        mirror = tuple(-int(i) + params.cutoff for i in k)
        if mirror == index:
            coeffs[index] = np.real(amplitude)
        else:
            coeffs[mirror] = np.conj(amplitude)
    return FourierField(params, coeffs, real=real)


def constant_field(params: ProblemParams, value: float) -> FourierField:
    """
    The field u ≡ value, i.e. c_0 = value * sqrt(T^N).
    """
    return single_mode(params, (0,) * params.dim, value * np.sqrt(params.volume), real=True)


def product_sine(params: ProblemParams) -> FourierField:
    """
    Π sin(ωx_i), sampled and transformed (exact: it is band-limited at |k|∞ = 1).
    """
    coords = grid_points(params.period, params.grid, params.dim)
    values = np.prod([np.sin(params.omega * x) for x in coords], axis=0)
    return to_fourier(GridField(params, values))


def symmetrize(u: FourierField) -> FourierField:
    return FourierField(u.params, symmetrize_coeffs(u.coeffs), real=True)


def random_field(
    params: ProblemParams,
    rng: np.random.Generator,
    real: bool = True,
    decay: float = 1.0,
    zero_mean: bool = False,
) -> FourierField:
    """
    Gaussian coefficients damped by (1+|k|²)^{-decay}; symmetrized when real.
    """
    raw = rng.standard_normal(params.shape) + 1j * rng.standard_normal(params.shape)
    coeffs = raw * (1.0 + params.k_squared) ** (-decay)
    if real:
        coeffs = symmetrize_coeffs(coeffs)
    if zero_mean:
        coeffs[params.zero_index] = 0.0
    return FourierField(params, coeffs, real=real)


def split_mean(u: FourierField) -> tuple:
    """
    (k = 0 part, zero-mean remainder); the two add back to u exactly.
    """
    mean = np.zeros_like(u.coeffs)
    mean[u.params.zero_index] = u.coeffs[u.params.zero_index]
    rest = np.array(u.coeffs, copy=True)
    rest[u.params.zero_index] = 0.0
    return u.with_coeffs(mean), u.with_coeffs(rest)
