import math

import pytest
from django.core.cache import cache

from core.context import reset_current_rng, set_current_rng
from tests.factories.spectral import ProblemParamsFactory
from variational.nonlinearities import builtin_nonlinearity


@pytest.fixture(autouse=True)
def enable_db_access_for_all_tests(db):
    """
    Automatically enables database access for all tests.
    """
    pass


@pytest.fixture(autouse=True)
def cleanup_rng_context():
    """
    Resets the run generator before and after EVERY test so draws never leak between tests.
    """
    reset_current_rng()
    yield
    reset_current_rng()


@pytest.fixture(autouse=True)
def clear_cache():
    """
    Fitted (F*) constants are cached; start every test cold.
    """
    cache.clear()
    yield
    cache.clear()


@pytest.fixture(autouse=True)
def output_root(settings, tmp_path):
    """
    Keeps run artifacts out of the repository.
    """
    settings.LAB_OUTPUT_ROOT = tmp_path / "runs"
    return settings.LAB_OUTPUT_ROOT


@pytest.fixture
def rng():
    return set_current_rng(1234)


@pytest.fixture
def params():
    """
    N=1, T=2π (so ω=1), s=1/2, m=1 on a small grid.
    """
    return ProblemParamsFactory()


@pytest.fixture
def log_nl():
    return builtin_nonlinearity("log_superlinear", period=2.0 * math.pi)


@pytest.fixture
def cubic_nl():
    return builtin_nonlinearity("pure_power(3)", period=2.0 * math.pi)
