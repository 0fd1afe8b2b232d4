"""
Unit tests for the Bessel extension profile.
"""

import numpy as np
import pytest

from core.exceptions import OrderOutOfRange
from extension.profile import exponential_trial, make_profile, perturbed_profile, profile_table
from spectral.params import kappa_constant


class TestExtensionProfile:
    def test_half_order_is_exponential(self):
        """
        At s = 1/2 the profile is e^{-ξ} in closed form.
        """
        heights = np.linspace(0.0, 20.0, 2001)

        error = np.max(np.abs(make_profile(0.5).theta(heights) - np.exp(-heights)))

        assert error < 1e-10

    @pytest.mark.parametrize("order", [0.25, 0.5, 0.75])
    def test_energy_equals_kappa(self, order):
        profile = make_profile(order)

        assert profile.energy() == pytest.approx(kappa_constant(order), rel=1e-6)

    @pytest.mark.parametrize("order", [0.25, 0.5, 0.75])
    def test_conormal_tends_to_kappa(self, order):
        profile = make_profile(order)

        assert profile.conormal(np.array([0.0]))[0] == pytest.approx(profile.kappa_s)
        assert profile.conormal(np.array([1e-12]))[0] == pytest.approx(profile.kappa_s, rel=1e-5)

    @pytest.mark.parametrize("order", [0.2, 0.5, 0.8])
    def test_profile_is_monotone_and_bounded(self, order):
        heights = np.linspace(0.0, 30.0, 500)
        theta = make_profile(order).theta(heights)

        assert theta[0] == 1.0
        assert np.all(np.diff(theta) <= 0)
        assert np.all(theta >= 0)
        assert theta[-1] < 1e-10

    @pytest.mark.parametrize("order", [0.25, 0.5, 0.75])
    def test_solves_the_profile_equation(self, order):
        """
        θ'' + ((1-2s)/ξ) θ' - θ = 0, with θ'' from centered differences of the exact θ'.
        """
        profile = make_profile(order)
        heights = np.geomspace(0.1, 10.0, 60)
        step = 1e-4 * heights

        second = (profile.derivative(heights + step) - profile.derivative(heights - step)) / (2.0 * step)
        drift = (1.0 - 2.0 * order) / heights * profile.derivative(heights)
        theta = profile.theta(heights)

        residual = np.abs(second + drift - theta)
        scale = np.abs(second) + np.abs(drift) + np.abs(theta)
        assert np.all(residual <= 1e-6 * scale)

    def test_boundary_derivative_limits(self):
        assert make_profile(0.25).derivative(np.array([0.0]))[0] == -np.inf
        assert make_profile(0.5).derivative(np.array([0.0]))[0] == -1.0
        assert make_profile(0.75).derivative(np.array([0.0]))[0] == 0.0

    def test_order_validated(self):
        with pytest.raises(OrderOutOfRange):
            make_profile(1.0)


class TestCompetitors:
    def test_perturbation_raises_energy(self):
        """
        Adding ξ e^{-ξ} keeps the trace and strictly increases the weighted energy.
        """
        profile = make_profile(0.4)

        for amplitude in (-0.1, 0.05, 0.3):
            assert perturbed_profile(profile, amplitude).energy() > profile.energy() + 1e-6

    def test_zero_perturbation_is_the_profile(self):
        profile = make_profile(0.4)

        assert perturbed_profile(profile, 0.0).energy() == pytest.approx(profile.energy(), rel=1e-10)

    def test_exponential_trial_above_kappa_off_half(self):
        assert exponential_trial(0.25).energy() > kappa_constant(0.25)
        assert exponential_trial(0.5).energy() == pytest.approx(1.0, rel=1e-8)


def test_profile_table_rows():
    rows = profile_table(make_profile(0.5), [0.0, 1.0])

    assert rows[0] == (0.0, 1.0, -1.0)
    assert rows[1][1] == pytest.approx(np.exp(-1.0))
    assert rows[1][2] == pytest.approx(-np.exp(-1.0))
