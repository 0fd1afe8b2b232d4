"""
Unit tests for boundary extrapolation.
"""

import numpy as np
import pytest

from core.exceptions import ProbeTooCoarse
from extension.richardson import correction_exponents, extrapolate_to_boundary, validate_probes


def test_correction_exponents_interleave():
    assert correction_exponents(0.25, 4) == (1.5, 2.0, 3.5, 4.0)
    assert correction_exponents(0.5, 3) == (1.0, 2.0, 3.0)


def test_exact_expansion_is_recovered():
    """
    Data that is exactly L + a h^{2-2s} + b h² extrapolates to L.
    """
    heights = np.array([0.1, 0.05, 0.025])
    values = 3.0 + 2.0 * heights + heights**2

    result = extrapolate_to_boundary(heights, values, 0.5)

    assert result.limit == pytest.approx(3.0, abs=1e-12)
    assert result.residual > 0
    assert result.exponents == (1.0, 2.0)


def test_residual_over_tolerance_raises():
    heights = np.array([0.5, 0.25, 0.125])
    values = np.cos(10.0 * heights)

    with pytest.raises(ProbeTooCoarse):
        extrapolate_to_boundary(heights, values, 0.5, tol=1e-12)


@pytest.mark.parametrize(
    "probes",
    [
        (1e-3, 5e-4),
        (1e-3, 1e-3, 5e-4),
        (5e-4, 1e-3, 2e-3),
        (1e-3, 0.0, -1e-3),
    ],
)
def test_invalid_probes_rejected(probes):
    with pytest.raises(ProbeTooCoarse):
        validate_probes(probes)
