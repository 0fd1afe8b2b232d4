"""
Unit tests for the extension: energies, the DtN map and the trace and strip inequalities.
"""

import math

import numpy as np
import pytest

from core.exceptions import MasslessExtension, ProbeTooCoarse
from extension.profile import exponential_trial, make_profile, perturbed_profile
from extension.services import (
    conormal_symbol,
    derivative_energy,
    dtn_apply,
    extend,
    extension_energy,
    gradient_energy,
    strip_bound_check,
    strip_energy,
    trace_inequality_check,
)
from spectral.services import constant_field, hs_norm, random_field, single_mode, to_grid, zero_field
from tests.factories.spectral import ProblemParamsFactory


class TestEnergies:
    @pytest.mark.parametrize("order", [0.25, 0.5, 0.75])
    def test_extension_energy_is_kappa_times_trace_norm(self, order, rng):
        params = ProblemParamsFactory(order=order, mass=0.7)
        u = random_field(params, rng)

        energy = extension_energy(extend(u))

        assert energy == pytest.approx(params.kappa_s * hs_norm(u) ** 2, rel=1e-6)

    def test_modes_decouple(self, params, rng):
        u = random_field(params, rng)
        low = params.k_squared <= 4
        slow = u.with_coeffs(np.where(low, u.coeffs, 0.0))
        fast = u.with_coeffs(np.where(low, 0.0, u.coeffs))

        total = extension_energy(extend(u))

        parts = extension_energy(extend(slow)) + extension_energy(extend(fast))
        assert total == pytest.approx(parts, rel=1e-12)

    def test_gradient_energy_below_full_energy(self, params, rng):
        v = extend(random_field(params, rng))

        assert derivative_energy(v) <= gradient_energy(v) <= extension_energy(v)

    def test_constant_has_only_mass_energy(self, params):
        """
        A constant extends to c θ(mξ); its gradient energy is the ξ-derivative part only.
        """
        v = extend(constant_field(params, 1.0))

        assert gradient_energy(v) == pytest.approx(derivative_energy(v))
        assert gradient_energy(v) < extension_energy(v)

    def test_massless_constant_has_no_extension(self):
        params = ProblemParamsFactory(massless=True)

        with pytest.raises(MasslessExtension):
            extension_energy(extend(constant_field(params, 1.0)))

    def test_sample_at_boundary_is_the_trace(self, params, rng):
        u = random_field(params, rng)
        v = extend(u)

        np.testing.assert_allclose(v.sample(0.0).values, to_grid(u).values, atol=1e-13)
        np.testing.assert_allclose(v.mode_values(0.0), 1.0)
        assert np.all(np.abs(v.sample(40.0).values) < 1e-12)


class TestDtN:
    @pytest.mark.parametrize("order", [0.25, 0.5, 0.75])
    def test_unit_rate_symbol_is_kappa(self, order):
        profile = make_profile(order)

        value, residual = conormal_symbol(profile, 1.0, np.array([1e-3, 5e-4, 2.5e-4]))

        assert value == pytest.approx(profile.kappa_s, rel=1e-6)
        assert residual < 1e-2

    def test_zero_rate_has_no_flux(self):
        assert conormal_symbol(make_profile(0.3), 0.0, np.array([1e-3, 5e-4, 2.5e-4])) == (0.0, 0.0)

    def test_dtn_applies_the_operator(self, rng):
        params = ProblemParamsFactory(order=0.3, mass=0.5)
        u = random_field(params, rng)

        result = dtn_apply(extend(u))

        np.testing.assert_allclose(result.coeffs, params.kappa_s * params.symbol * u.coeffs, rtol=1e-5, atol=1e-12)

    def test_single_mode_half_order(self, params):
        """
        At s = 1/2, m = 1 the symbol of k = 1 is sqrt(2).
        """
        u = single_mode(params, (1,), 1.0, real=True)

        assert dtn_apply(extend(u)).coefficient((1,)).real == pytest.approx(math.sqrt(2.0), rel=1e-6)

    def test_coarse_probes_raise(self, params):
        with pytest.raises(ProbeTooCoarse):
            dtn_apply(extend(single_mode(params, (1,), 1.0, real=True)), probes=(1e-3, 5e-4))


class TestTraceInequality:
    def test_pure_extension_attains_equality(self, params, rng):
        report = trace_inequality_check(random_field(params, rng))

        assert report.holds
        assert report.is_extension
        assert abs(report.relative_gap) < 1e-8

    def test_perturbed_profile_is_strictly_larger(self, params, rng):
        u = random_field(params, rng)

        report = trace_inequality_check(u, perturbed_profile(make_profile(params.order), 0.1))

        assert report.holds
        assert not report.is_extension
        assert report.relative_gap > 1e-4
        assert report.label == "perturbed(0.1)"

    def test_exponential_competitor(self, rng):
        params = ProblemParamsFactory(order=0.25)

        report = trace_inequality_check(random_field(params, rng), exponential_trial(0.25))

        assert report.holds
        assert report.gap > 0


class TestStripBound:
    def test_zero_field(self, params):
        report = strip_bound_check(extend(zero_field(params)), 1.0)

        assert report.strip == 0.0
        assert report.slack == 0.0
        assert report.holds

    def test_random_extensions(self, params, rng):
        for _ in range(10):
            v = extend(random_field(params, rng))
            for delta in (0.1, 1.0, 10.0):
                report = strip_bound_check(v, delta)
                assert report.holds, report
                assert report.slack >= 0

    def test_single_mode_closed_form(self, params):
        """
        s = 1/2, λ = sqrt(2): ∫_0^δ e^{-2λξ} dξ per unit coefficient mass.
        """
        u = single_mode(params, (1,), 1.0, real=True)
        lam = math.sqrt(2.0)
        delta = 1.0

        expected = 2.0 * (1.0 - math.exp(-2.0 * lam * delta)) / (2.0 * lam)

        assert strip_energy(extend(u), delta) == pytest.approx(expected, rel=1e-8)
