"""
Run-wide defaults shared by every analysis.

The active settings are process global. Commands call `configure` once from the
parsed arguments; batch workers and tests use `override` to scope a change.

Functions:
- get_settings(): Return the active settings.
- configure(**changes): Replace fields of the active settings.
- override(**changes): Context manager that restores the previous settings on exit.
"""
from contextlib import contextmanager
from dataclasses import dataclass, replace
import logging
import threading

logger = logging.getLogger(__name__)

DEFAULT_SEED = 20100623


@dataclass(frozen=True)
class Settings:
    """
    Knobs of the symbolic engine.

    Attributes:
        seed (int): Seed of every pseudo-random choice (sample points, random modules).
        samples (int): Number of rational points used to cross-check zero tests.
        max_nodes (int): Largest expression tree accepted after normalization.
        max_jet_order (int): Highest derivative order total derivatives may produce.
        cross_check (bool): Whether zero tests are confirmed by sampling.
        sample_numerator_bound (int): Sampled numerators lie in [-bound, bound].
        sample_denominator_bound (int): Sampled denominators lie in [1, bound].
    """
    seed: int = DEFAULT_SEED
    samples: int = 20
    max_nodes: int = 2_000_000
    max_jet_order: int = 12
    cross_check: bool = True
    sample_numerator_bound: int = 997
    sample_denominator_bound: int = 97


_lock = threading.Lock()
_active = Settings()


def get_settings():
    """Return the active settings."""
    return _active


def configure(**changes):
    """
    Replace fields of the active settings.

    Args:
        **changes: Field names of `Settings` with their new values. `None` values
            are ignored so that unset command line flags keep the defaults.

    Returns:
        Settings: The new active settings.
    """
    global _active
    changes = {k: v for k, v in changes.items() if v is not None}
    with _lock:
        _active = replace(_active, **changes)
    logger.debug("Settings changed: %s", changes)
    return _active


@contextmanager
def override(**changes):
    """Temporarily replace fields of the active settings."""
    global _active
    previous = _active
    configure(**changes)
    try:
        yield _active
    finally:
        with _lock:
            _active = previous
