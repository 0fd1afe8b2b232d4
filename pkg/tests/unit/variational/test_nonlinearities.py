"""
Unit tests for the builtin nonlinearities and label parsing.
"""

import math

import numpy as np
import pytest

from core.exceptions import InvalidParams, UnknownLabel
from variational.nonlinearities import builtin_nonlinearity, parse_label

ORIGIN = (np.zeros(1),)


class TestParseLabel:
    def test_bare_name(self):
        assert parse_label("log_superlinear") == ("log_superlinear", None)

    def test_name_with_exponent(self):
        assert parse_label("pure_power(3)") == ("pure_power", 3.0)
        assert parse_label(" modulated_power( 2.5 ) ") == ("modulated_power", 2.5)

    @pytest.mark.parametrize("label", ["cubic", "pure_power(three)", "", "pure_power(3"])
    def test_unknown_labels_rejected(self, label):
        with pytest.raises(UnknownLabel):
            parse_label(label)


class TestBuiltins:
    def test_log_superlinear_values(self, log_nl):
        """
        F(1) = 0·log 2 - 1/4 + 1/2 and f(1) = log 2.
        """
        t = np.array([1.0])

        assert log_nl.F(ORIGIN, t)[0] == pytest.approx(0.25, rel=1e-14)
        assert log_nl.f(ORIGIN, t)[0] == pytest.approx(math.log(2.0), rel=1e-14)

    def test_log_primitive_series_matches_closed_form(self, log_nl):
        """
        Both branches agree where they meet.
        """
        below = np.array([0.999e-3])
        above = np.array([1.001e-3])

        assert log_nl.F(ORIGIN, below)[0] == pytest.approx(log_nl.F(ORIGIN, above)[0], rel=1e-2)
        assert log_nl.G(ORIGIN, below)[0] > 0

    @pytest.mark.parametrize("label", ["log_superlinear", "pure_power(3)", "modulated_power(3)", "zero"])
    def test_excess_matches_definition(self, label):
        nl = builtin_nonlinearity(label)
        coords = (np.linspace(0.0, 2.0 * math.pi, 7)[:, None],)
        t = np.linspace(-20.0, 20.0, 41)[None, :]

        expected = nl.f(coords, t) * t - 2.0 * nl.F(coords, t)

        np.testing.assert_allclose(nl.G(coords, t), expected, rtol=1e-10, atol=1e-10)

    def test_pure_power(self, cubic_nl):
        t = np.array([-2.0, 0.5, 3.0])

        assert cubic_nl.label == "pure_power(3)"
        np.testing.assert_allclose(cubic_nl.f(ORIGIN, t), t**3)
        np.testing.assert_allclose(cubic_nl.G(ORIGIN, t), 0.5 * np.abs(t) ** 4)

    def test_modulated_power_range(self):
        nl = builtin_nonlinearity("modulated_power(3)")
        x = (np.linspace(0.0, 2.0 * math.pi, 101),)
        amplitude = nl.amplitude(x)

        assert nl.modulation_range == (0.5, 1.5)
        assert nl.growth == 1.5
        assert amplitude.min() == pytest.approx(0.5)
        assert amplitude.max() == pytest.approx(1.5)

    def test_zero_is_flagged(self):
        nl = builtin_nonlinearity("zero")

        assert nl.is_zero
        assert not np.any(nl.F(ORIGIN, np.array([5.0])))

    def test_exponent_must_exceed_one(self):
        with pytest.raises(InvalidParams):
            builtin_nonlinearity("pure_power(1)")

    def test_conflicting_exponents_rejected(self):
        with pytest.raises(InvalidParams):
            builtin_nonlinearity("pure_power(3)", exponent=2.5)

    def test_default_exponent(self):
        assert builtin_nonlinearity("log_superlinear").exponent == 3.0
        assert builtin_nonlinearity("pure_power", exponent=2.5).exponent == 2.5
