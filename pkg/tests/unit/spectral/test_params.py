"""
Unit tests for ProblemParams and its wave-number tables.
"""

import math

import numpy as np
import pytest

from core.exceptions import InvalidParams, OrderOutOfRange
from spectral.params import KAPPA_NORMALIZED, kappa_constant
from tests.factories.spectral import ProblemParamsFactory


class TestProblemParams:
    def test_derived_scalars_on_the_standard_torus(self):
        """
        T = 2π gives ω = 1; at s = 1/2 the extension constant is exactly 1 and m₀ = 1/2.
        """
        params = ProblemParamsFactory()

        assert params.omega == pytest.approx(1.0)
        assert params.volume == pytest.approx(2.0 * math.pi)
        assert params.kappa_s == pytest.approx(1.0)
        assert params.mass_threshold == pytest.approx(0.5)
        assert params.shape == (17,)

    @pytest.mark.parametrize("order", [0.0, 1.0, -0.2, 1.5])
    def test_order_outside_unit_interval_rejected(self, order):
        with pytest.raises(OrderOutOfRange):
            ProblemParamsFactory(order=order)

    def test_grid_must_resolve_the_cutoff(self):
        """
        M >= 2K + 2 is required so every retained mode is represented on the grid.
        """
        with pytest.raises(InvalidParams):
            ProblemParamsFactory(cutoff=8, grid=17)

    def test_negative_mass_rejected(self):
        with pytest.raises(InvalidParams):
            ProblemParamsFactory(mass=-0.1)

    def test_unknown_kappa_mode_rejected(self):
        with pytest.raises(InvalidParams):
            ProblemParamsFactory(kappa_mode="scaled")

    def test_normalized_mode_drops_kappa(self):
        params = ProblemParamsFactory(order=0.25, kappa_mode=KAPPA_NORMALIZED)

        assert params.kappa == 1.0
        assert params.kappa_s == pytest.approx(kappa_constant(0.25))

    def test_shifted_symbol_vanishes_only_at_zero(self):
        params = ProblemParamsFactory(order=0.3, mass=0.7)
        shifted = params.shifted_symbol

        assert shifted[params.zero_index] == 0.0
        mask = np.ones(params.shape, dtype=bool)
        mask[params.zero_index] = False
        assert np.all(shifted[mask] > 0)

    def test_symbol_matches_eigenvalue_power(self):
        params = ProblemParamsFactory(order=0.75, mass=2.0)

        np.testing.assert_allclose(params.symbol, params.eigenvalues ** 1.5, rtol=1e-13)

    def test_critical_exponent(self):
        """
        Infinite when N <= 2s, 2N/(N - 2s) otherwise.
        """
        assert math.isinf(ProblemParamsFactory().critical_exponent)
        assert ProblemParamsFactory(planar=True).critical_exponent == pytest.approx(4.0)

    def test_padded_grid_dealiases_growth(self):
        params = ProblemParamsFactory()

        assert params.padded_grid(3.0) == 64
        assert params.padded_grid(1.0) == params.grid

    def test_dual_weight_patches_massless_zero_mode(self):
        params = ProblemParamsFactory(massless=True)

        assert params.symbol[params.zero_index] == 0.0
        assert params.dual_weight[params.zero_index] == 1.0

    def test_tables_are_read_only(self):
        params = ProblemParamsFactory()

        with pytest.raises(ValueError):
            params.symbol[0] = 1.0

    def test_with_mass_keeps_discretization(self):
        params = ProblemParamsFactory()
        lighter = params.with_mass(0.25)

        assert lighter.mass == 0.25
        assert (lighter.cutoff, lighter.grid, lighter.order) == (params.cutoff, params.grid, params.order)
