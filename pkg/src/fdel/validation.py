"""Input-validation helpers shared by the estimator and CLI layers."""

from __future__ import annotations

import numbers

import numpy as np

from .estimating import EstimatingSystem, parse_system
from .exceptions import InvalidInputError
from .spectral import Periodogram, as_series, periodogram

__all__ = ["check_series", "check_periodogram", "check_system", "check_level", "check_bounds",
           "default_variant"]


def check_series(x) -> np.ndarray:
    """1-d finite float array with at least four observations."""
    return as_series(x)


def check_periodogram(x) -> Periodogram:
    """Accept either a ``Periodogram`` or raw observations."""
    if isinstance(x, Periodogram):
        return x
    return periodogram(check_series(x))


def check_system(system) -> EstimatingSystem:
    if isinstance(system, EstimatingSystem):
        return system
    if isinstance(system, str):
        return parse_system(system)
    raise InvalidInputError(f"expected an EstimatingSystem or grammar string, got {type(system).__name__}")


def check_level(level, name="level") -> float:
    if not isinstance(level, numbers.Real) or not 0.0 < float(level) < 1.0:
        raise InvalidInputError(f"{name} must lie in (0, 1), got {level!r}")
    return float(level)


def check_bounds(bounds, p):
    """``None`` or ``p`` pairs ``(lo, hi)`` with ``lo < hi``."""
    if bounds is None:
        return None
    arr = np.asarray(bounds, dtype=float)
    if arr.ndim == 1 and arr.size == 2 and p == 1:
        arr = arr.reshape(1, 2)
    if arr.shape != (p, 2) or not np.all(arr[:, 0] < arr[:, 1]):
        raise InvalidInputError(f"bounds must be {p} pairs (lo, hi) with lo < hi")
    return [tuple(map(float, row)) for row in arr]


def default_variant(system: EstimatingSystem) -> str:
    """Constraint variant implied by the system's structure."""
    if system.squared_moment:
        return "squared_moment"
    if system.nonzero_target or (system.p == 0 and system.model_density is not None):
        return "mean_corrected"
    return "plain"
