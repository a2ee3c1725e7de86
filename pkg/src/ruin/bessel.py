"""
src/ruin/bessel.py
Modified Bessel function of the first kind, order one.
Ascending series up to the switch point, asymptotic expansion beyond.
"""

from __future__ import annotations

import numpy as np

from src.config import get_settings
from src.errors import DomainError

_SERIES_TERMS = 80
_ASYMPTOTIC_TERMS = 60


def _series(z: np.ndarray) -> np.ndarray:
    """sum_m (z/2)^{2m+1} / (m! (m+1)!)"""
    half = z / 2.0
    term = half.copy()
    total = half.copy()
    quarter = half * half
    for m in range(_SERIES_TERMS):
        term = term * quarter / ((m + 1.0) * (m + 2.0))
        total = total + term
        if np.all(term <= 1e-17 * total):
            break
    return total


def _asymptotic_scaled(z: np.ndarray) -> np.ndarray:
    """e^{-z} I_1(z) ~ (2 pi z)^{-1/2} sum_k (-1)^k a_k / z^k, cut at the smallest term."""
    total = np.ones_like(z)
    term = np.ones_like(z)
    done = np.zeros(z.shape, dtype=bool)
    for k in range(1, _ASYMPTOTIC_TERMS):
        nxt = -term * (4.0 - (2.0 * k - 1.0) ** 2) / (8.0 * k * z)
        # stop each entry once the series stops decreasing
        growing = np.abs(nxt) >= np.abs(term)
        done |= growing
        total = np.where(done, total, total + nxt)
        term = np.where(done, term, nxt)
        if np.all(done | (np.abs(term) < 1e-17)):
            break
    return total / np.sqrt(2.0 * np.pi * z)


def _check(z: np.ndarray | float) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    if np.any(z < 0.0) or np.any(np.isnan(z)):
        raise DomainError("bessel_i1 is defined here for z >= 0 only")
    return z


def bessel_i1e(z: np.ndarray | float) -> np.ndarray:
    """Exponentially scaled e^{-z} I_1(z); never overflows."""
    arr = _check(z)
    shape = arr.shape
    arr = np.atleast_1d(arr)
    switch = get_settings().numerics.bessel_switch
    small = arr <= switch
    out = np.empty_like(arr)
    out[small] = np.exp(-arr[small]) * _series(arr[small])
    out[~small] = _asymptotic_scaled(arr[~small])
    return out.reshape(shape)


def bessel_i1(z: np.ndarray | float) -> np.ndarray | float:
    """I_1(z) for z >= 0; returns a float for scalar input."""
    arr = _check(z)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    switch = get_settings().numerics.bessel_switch
    small = arr <= switch
    out = np.empty_like(arr)
    out[small] = _series(arr[small])
    with np.errstate(over="ignore"):
        out[~small] = np.exp(arr[~small]) * _asymptotic_scaled(arr[~small])
    return float(out[0]) if scalar else out
