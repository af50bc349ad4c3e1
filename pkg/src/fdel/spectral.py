"""Fourier frequencies, discrete Fourier transforms and the periodogram."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import InvalidInputError

__all__ = [
    "TimeSeries",
    "Periodogram",
    "as_series",
    "fourier_frequencies",
    "dft",
    "periodogram",
]

_CLAMP_TOL = 1e-12


def as_series(x) -> np.ndarray:
    """Validate ``x`` and return it as a 1-d float array.

    Accepts a sequence, a 1-d array, a single-column 2-d array or a
    :class:`TimeSeries`.
    """
    if isinstance(x, TimeSeries):
        return x.values
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    if arr.ndim != 1:
        raise InvalidInputError(f"expected a univariate series, got shape {arr.shape}")
    if arr.size < 4:
        raise InvalidInputError(f"series needs at least 4 observations, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("series contains non-finite values")
    return arr


@dataclass(frozen=True)
class TimeSeries:
    """Observations ``x_1..x_n`` of a real, univariate series."""

    values: np.ndarray

    def __post_init__(self):
        arr = as_series(self.values)
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def n(self) -> int:
        return int(self.values.size)

    @property
    def mean(self) -> float:
        return float(self.values.mean())

    def __len__(self):
        return self.n


@dataclass(frozen=True)
class Periodogram:
    """Periodogram ordinates at the Fourier frequencies ``2*pi*j/n``, ``j = 1..N``.

    ``N = (n - 1) // 2`` so both the zero frequency and (for even ``n``) the
    Nyquist frequency are left out.
    """

    n: int
    ordinates: np.ndarray
    frequencies: np.ndarray = field(default=None)

    def __post_init__(self):
        n = int(self.n)
        freqs = fourier_frequencies(n)
        ords = np.asarray(self.ordinates, dtype=float).ravel()
        if ords.shape != freqs.shape:
            raise InvalidInputError(
                f"expected {freqs.size} ordinates for n={n}, got {ords.size}"
            )
        if not np.all(np.isfinite(ords)):
            raise InvalidInputError("periodogram ordinates must be finite")
        if np.any(ords < -_CLAMP_TOL * max(1.0, float(np.max(np.abs(ords))))):
            raise InvalidInputError("periodogram ordinates must be nonnegative")
        ords = np.clip(ords, 0.0, None)
        ords.setflags(write=False)
        freqs.setflags(write=False)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "ordinates", ords)
        object.__setattr__(self, "frequencies", freqs)

    @property
    def N(self) -> int:
        return int(self.ordinates.size)

    def __len__(self):
        return self.N


def fourier_frequencies(n: int) -> np.ndarray:
    """Return ``2*pi*j/n`` for ``j = 1, ..., (n - 1) // 2``."""
    if int(n) != n or n < 4:
        raise InvalidInputError(f"n must be an integer >= 4, got {n!r}")
    n = int(n)
    j = np.arange(1, (n - 1) // 2 + 1)
    return 2.0 * np.pi * j / n


def dft(x, lam) -> complex | np.ndarray:
    """Direct evaluation of ``sum_{t=1}^n x_t exp(-i t lam)``.

    ``lam`` may be a scalar or an array of frequencies. This is the O(n)
    per-frequency reference path; :func:`periodogram` uses the FFT.
    """
    x = np.asarray(x, dtype=float).ravel()
    lam_arr = np.asarray(lam, dtype=float)
    t = np.arange(1, x.size + 1)
    phase = np.exp(-1j * np.multiply.outer(lam_arr, t))
    out = phase @ x
    if lam_arr.ndim == 0:
        return complex(out)
    return out


def periodogram(x, method: str = "fft") -> Periodogram:
    """Periodogram ``|sum x_t exp(-i t lam_j)|^2 / (2 pi n)`` at ``j = 1..N``.

    The series is not demeaned: at nonzero Fourier frequencies the
    transform of a constant vanishes, so the result already equals the
    mean-corrected periodogram there.

    Parameters
    ----------
    x : array-like or TimeSeries
    method : {"fft", "naive"}
        ``"naive"`` sums the transform directly, O(n^2); kept as an oracle.
    """
    values = as_series(x)
    n = values.size
    N = (n - 1) // 2
    if method == "fft":
        # fft indexes time from 0; the unit phase shift does not change |.|
        d = np.fft.rfft(values)[1 : N + 1]
    elif method == "naive":
        d = dft(values, fourier_frequencies(n))
    else:
        raise InvalidInputError(f"unknown periodogram method {method!r}")
    ords = (d.real**2 + d.imag**2) / (2.0 * np.pi * n)
    return Periodogram(n=n, ordinates=ords)
