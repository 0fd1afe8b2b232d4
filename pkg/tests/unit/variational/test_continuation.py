"""
Unit tests for the uniform level bracket, the norm bounds and the schedule.
"""

import math
from unittest.mock import patch

import pytest

from core.exceptions import InvalidParams
from extension.services import extend
from spectral.services import constant_field, random_field
from variational.continuation import (
    _solve_at,
    bounds,
    lebesgue_norm,
    nontriviality_floor,
    norm_bounds,
    validate_schedule,
)
from variational.hypotheses import growth_constant
from variational.linking import geometry_constant
from variational.nonlinearities import builtin_nonlinearity
from variational.refine import MinMaxResult, SolverOptions


class TestBounds:
    def test_log_superlinear(self, params, log_nl):
        """
        ω = 1, s = 1/2: m₀ = 1/2, ε = 1/8 and b = 1/8.
        """
        result = bounds(params, log_nl)

        assert result.m0 == pytest.approx(0.5)
        assert result.epsilon == pytest.approx(0.125)
        assert result.b == pytest.approx(0.125)
        assert 0 < result.K1 <= result.K2 < math.inf

    def test_amplitude_uses_threshold_mass(self, params, log_nl):
        result = bounds(params, log_nl)

        assert result.C_bar == pytest.approx(geometry_constant(params.with_mass(0.5)))
        assert result.A == pytest.approx(result.C_bar / params.kappa)

    def test_independent_of_current_mass(self, params, log_nl):
        first = bounds(params.with_mass(0.25), log_nl)
        second = bounds(params.with_mass(0.0625), log_nl)

        assert first == second

    def test_linear_problem_has_no_bracket(self, params):
        result = bounds(params, builtin_nonlinearity("zero"))

        assert result.K1 == math.inf
        assert result.K2 == math.inf

    def test_contains(self, params, log_nl):
        result = bounds(params, log_nl)

        assert result.contains(result.K1, 0.0)
        assert result.contains(result.K2 + 1e-12, 1e-9)
        assert not result.contains(result.K1 / 2.0, 1e-12)


class TestNontrivialityFloor:
    def test_root_solves_the_balance(self, params, cubic_nl):
        level_bounds = bounds(params, cubic_nl)
        massless = params.with_mass(0.0)

        floor = nontriviality_floor(massless, cubic_nl, level_bounds)

        holder = massless.volume ** 0.5
        c_quarter = growth_constant(cubic_nl, 0.25)
        balance = massless.kappa * (holder * floor**2 + 6.0 * c_quarter * floor**4)
        assert floor > 0
        assert balance == pytest.approx(2.0 * level_bounds.K1, rel=1e-9)

    def test_infinite_level(self, params):
        zero = builtin_nonlinearity("zero")

        assert nontriviality_floor(params, zero, bounds(params, zero)) == math.inf


class TestNormBounds:
    def test_random_field(self, params, log_nl, rng):
        u = random_field(params, rng, real=True)

        report = norm_bounds(extend(u), log_nl)

        assert report.gradient_ok
        assert report.seminorm_ok
        assert report.gradient_energy <= report.energy

    def test_small_field_meets_l2_bound(self, params, log_nl, rng):
        u = random_field(params, rng, real=True).scale(1e-3)

        assert norm_bounds(extend(u), log_nl).holds


class TestLebesgueNorm:
    def test_constant(self, params):
        u = constant_field(params, 2.0)

        assert lebesgue_norm(u, 4.0, 64) == pytest.approx(2.0 * (2.0 * math.pi) ** 0.25, rel=1e-12)


class TestValidateSchedule:
    def test_accepts_decreasing(self):
        assert validate_schedule([0.5, 0.25, 0.125], 0.5) == (0.5, 0.25, 0.125)

    @pytest.mark.parametrize(
        "schedule",
        [[], [0.25, 0.0], [0.25, -0.1], [0.25, 0.25], [0.1, 0.2], [0.6, 0.3]],
    )
    def test_rejects(self, schedule):
        with pytest.raises(InvalidParams):
            validate_schedule(schedule, 0.5)


class TestWarmStart:
    def test_level_outside_bracket_falls_back_to_search(self, params, log_nl, rng):
        level_bounds = bounds(params, log_nl)
        u = random_field(params, rng, real=True)
        stray = MinMaxResult(u, level_bounds.K2 + 1.0, 0.0, converged=True)
        found = MinMaxResult(u, 0.5 * (level_bounds.K1 + level_bounds.K2), 0.0, converged=True)
        options = SolverOptions()

        with (
            patch("variational.continuation.refine", return_value=stray),
            patch("variational.continuation.build_geometry") as mock_geometry,
            patch("variational.continuation.minmax_search", return_value=found) as mock_search,
        ):
            result, warm = _solve_at(params.with_mass(0.25), log_nl, u, options, True, level_bounds)

        assert result is found
        assert not warm
        mock_geometry.assert_called_once()
        mock_search.assert_called_once_with(mock_geometry.return_value, log_nl, options)

    def test_level_inside_bracket_is_kept(self, params, log_nl, rng):
        level_bounds = bounds(params, log_nl)
        u = random_field(params, rng, real=True)
        inside = MinMaxResult(u, 0.5 * (level_bounds.K1 + level_bounds.K2), 0.0, converged=True)

        with (
            patch("variational.continuation.refine", return_value=inside),
            patch("variational.continuation.minmax_search") as mock_search,
        ):
            result, warm = _solve_at(params.with_mass(0.25), log_nl, u, SolverOptions(), True, level_bounds)

        assert result is inside
        assert warm
        mock_search.assert_not_called()
