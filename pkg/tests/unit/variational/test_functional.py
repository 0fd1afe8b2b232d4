"""
Unit tests for the energy functional, its gradient and the Hessian action.
"""

import math

import numpy as np
import pytest

from spectral.params import KAPPA_NORMALIZED
from spectral.services import constant_field, hs_norm, pairing, random_field, shifted_form, single_mode, zero_field
from tests.factories.spectral import ProblemParamsFactory
from variational.functional import (
    L2,
    cerami_measure,
    dual_norm,
    excess_integral,
    functional_gradient,
    functional_value,
    hessian_apply,
    integrate_on_grid,
    quadratic_part,
)
from variational.nonlinearities import builtin_nonlinearity

POWERS = ["pure_power(3)", "modulated_power(3)", "pure_power(5)"]
BUILTINS = ["log_superlinear", *POWERS]
PAIRS = 20
EPSILONS = (1e-2, 5e-3, 2.5e-3)


def directional_error(u, h, nl, epsilon):
    difference = (functional_value(u.axpy(epsilon, h), nl) - functional_value(u.axpy(-epsilon, h), nl)) / (2 * epsilon)
    return abs(difference - pairing(functional_gradient(u, nl), h))


class TestFunctionalValue:
    def test_zero_field(self, params, log_nl):
        assert functional_value(zero_field(params), log_nl) == 0.0

    def test_constant_field(self, params, log_nl):
        """
        Constants see only -κ∫F, and F(1) = 1/4 on a torus of length 2π.
        """
        u = constant_field(params, 1.0)

        assert functional_value(u, log_nl) == pytest.approx(-2.0 * math.pi * 0.25, rel=1e-12)

    def test_linear_problem(self, params):
        nl = builtin_nonlinearity("zero")
        u = single_mode(params, (2,), 0.3, real=True)

        assert functional_value(u, nl) == pytest.approx(0.5 * params.kappa * shifted_form(u), rel=1e-14)

    def test_normalized_mode_rescales(self, log_nl, rng):
        explicit = ProblemParamsFactory(order=0.3)
        normalized = ProblemParamsFactory(order=0.3, kappa_mode=KAPPA_NORMALIZED)
        u = random_field(explicit, rng, real=True)

        ratio = functional_value(u, log_nl) / functional_value(u.with_params(normalized), log_nl)

        assert ratio == pytest.approx(explicit.kappa_s, rel=1e-12)


class TestQuadraticPart:
    def test_vanishes_on_constants(self, params):
        assert quadratic_part(constant_field(params, 2.0)) == 0.0

    def test_nonnegative(self, params, rng):
        for _ in range(20):
            assert quadratic_part(random_field(params, rng, real=True)) >= 0.0


class TestGradient:
    @pytest.mark.parametrize("label", BUILTINS)
    def test_central_differences_are_second_order(self, label, params, rng):
        """
        Summed over random (u, h) pairs the central difference error drops by 4 per halving of ε.
        """
        nl = builtin_nonlinearity(label)
        pairs = [(random_field(params, rng, real=True), random_field(params, rng, real=True)) for _ in range(PAIRS)]

        totals = [sum(directional_error(u, h, nl, epsilon) for u, h in pairs) for epsilon in EPSILONS]
        orders = [math.log2(a / b) for a, b in zip(totals, totals[1:])]

        for order in orders:
            assert order >= 1.9

    def test_log_superlinear_error_bound(self, params, log_nl, rng):
        """
        |F'''| <= 2 bounds the central difference error by κ ε²/3 ∫|h|³.
        """
        for _ in range(PAIRS):
            u = random_field(params, rng, real=True)
            h = random_field(params, rng, real=True)
            cube = integrate_on_grid(h, log_nl, lambda n, x, t: np.abs(t) ** 3)
            roundoff = 1e-12 * (1.0 + abs(functional_value(u, log_nl)))
            for epsilon in EPSILONS:
                bound = params.kappa * epsilon**2 / 3.0 * cube
                assert directional_error(u, h, log_nl, epsilon) <= bound + roundoff

    def test_log_superlinear_gradient(self, params, log_nl, rng):
        u = random_field(params, rng, real=True)
        h = random_field(params, rng, real=True)

        assert directional_error(u, h, log_nl, 1e-5) < 1e-7 * (1.0 + hs_norm(u) ** 2)

    def test_linear_problem(self, params):
        nl = builtin_nonlinearity("zero")
        u = single_mode(params, (1,), 0.5, real=True)

        gradient = functional_gradient(u, nl)

        np.testing.assert_allclose(gradient.coeffs, params.kappa * params.shifted_symbol * u.coeffs)

    def test_excess_identity(self, params, log_nl, rng):
        """
        2J(u) - <J'(u), u> = κ ∫ G(x, u).
        """
        u = random_field(params, rng, real=True).scale(3.0)

        lhs = 2.0 * functional_value(u, log_nl) - pairing(functional_gradient(u, log_nl), u)
        rhs = params.kappa * excess_integral(u, log_nl)

        assert lhs == pytest.approx(rhs, abs=1e-8 * (1.0 + hs_norm(u) ** 2))


class TestHessian:
    @pytest.mark.parametrize("label", ["pure_power(3)", "log_superlinear"])
    def test_matches_gradient_differences(self, label, params, rng):
        nl = builtin_nonlinearity(label)
        u = random_field(params, rng, real=True)
        h = random_field(params, rng, real=True)
        epsilon = 1e-5

        difference = (
            functional_gradient(u.axpy(epsilon, h), nl).coeffs - functional_gradient(u.axpy(-epsilon, h), nl).coeffs
        ) / (2 * epsilon)
        applied = hessian_apply(u, nl, h.coeffs)

        np.testing.assert_allclose(applied, difference, atol=1e-6 * (1.0 + np.abs(applied).max()))


class TestNorms:
    def test_dual_norm_of_single_mode(self, params):
        g = single_mode(params, (1,), 1.0)

        assert dual_norm(g, L2) == pytest.approx(1.0)
        assert dual_norm(g) == pytest.approx(1.0 / math.sqrt(params.dual_weight[params.cutoff + 1]))

    def test_cerami_at_zero(self, params, log_nl):
        assert cerami_measure(zero_field(params), log_nl) == (0.0, 0.0)
