"""
Unit tests for the trace embedding constant.
"""

import math

import pytest

from core.exceptions import DivergentSum
from spectral.params import KAPPA_NORMALIZED
from spectral.services import hs_norm, random_field
from tests.factories.spectral import ProblemParamsFactory
from variational.continuation import lebesgue_norm
from variational.embedding import hy_constant, lattice_sum, sum_exponent


class TestSumExponent:
    def test_line(self, params):
        """
        q = 4: q' = 4/3 and e = (4/3)/(2/3) = 2.
        """
        conjugate, exponent = sum_exponent(params, 4.0)

        assert conjugate == pytest.approx(4.0 / 3.0)
        assert exponent == pytest.approx(2.0)

    @pytest.mark.parametrize("q", [2.0, 1.5])
    def test_q_must_exceed_two(self, params, q):
        with pytest.raises(DivergentSum):
            sum_exponent(params, q)

    def test_q_must_stay_below_critical(self):
        planar = ProblemParamsFactory(planar=True)

        assert sum_exponent(planar, 3.0)[1] == pytest.approx(3.0)
        with pytest.raises(DivergentSum):
            sum_exponent(planar, 4.0)


class TestLatticeSum:
    def test_line_is_exact(self):
        assert lattice_sum(1, 2.0) == pytest.approx(math.pi**2 / 3.0, rel=1e-14)

    def test_plane_is_an_upper_bound(self):
        """
        Σ_{k≠0} |k|^{-4} over Z² is 4 ζ(2) β(2) ≈ 6.0268.
        """
        value = lattice_sum(2, 4.0)

        assert value >= 6.0268
        assert value == pytest.approx(6.0268, rel=1e-4)


class TestHYConstant:
    def test_bounds_random_fields(self, params, rng):
        constant = hy_constant(params, 4.0)

        for _ in range(20):
            u = random_field(params, rng, real=True, zero_mean=True)
            energy_norm = math.sqrt(params.kappa) * hs_norm(u)
            assert lebesgue_norm(u, 4.0, 128) <= constant * energy_norm

    def test_kappa_scaling(self):
        explicit = ProblemParamsFactory(order=0.3)
        normalized = ProblemParamsFactory(order=0.3, kappa_mode=KAPPA_NORMALIZED)

        ratio = hy_constant(explicit, 3.0) / hy_constant(normalized, 3.0)

        assert ratio == pytest.approx(explicit.kappa_s**-0.5, rel=1e-12)

    def test_divergent_exponent(self, params):
        with pytest.raises(DivergentSum):
            hy_constant(params, 2.0)
