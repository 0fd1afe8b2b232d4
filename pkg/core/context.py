"""
Context management utilities for the per-run random generator.
"""

from contextvars import ContextVar
from typing import Optional

import numpy as np
from django.conf import settings

# Generator owned by the active experiment run.
# Using contextvars keeps concurrent runs (threads, celery workers) from sharing one stream.
_current_rng: ContextVar[Optional[np.random.Generator]] = ContextVar("current_rng", default=None)
_current_seed: ContextVar[Optional[int]] = ContextVar("current_seed", default=None)


def set_current_rng(seed: int) -> np.random.Generator:
    """
    Installs a fresh generator seeded with `seed` for the current execution context.
    """
    rng = np.random.default_rng(seed)
    _current_rng.set(rng)
    _current_seed.set(seed)
    return rng


def get_current_rng() -> np.random.Generator:
    """
    Retrieves the generator of the current execution context.
    Outside of a run, a generator seeded with LAB_DEFAULT_SEED is installed lazily.
    """
    rng = _current_rng.get()
    if rng is None:
        rng = set_current_rng(settings.LAB_DEFAULT_SEED)
    return rng


def get_current_seed() -> Optional[int]:
    return _current_seed.get()


def reset_current_rng():
    """
    Resets the context variables to None.
    """
    _current_rng.set(None)
    _current_seed.set(None)
