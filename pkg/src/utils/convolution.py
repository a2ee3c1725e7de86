"""
src/utils/convolution.py
Quadrature-weighted convolutions on a uniform grid x_k = k h.

trapezoid_convolve  - trapezoid rule for (f * g)(x_k), both tabulated.
running_integral    - (pi * f)(x_k), i.e. the cumulative trapezoid.
erlang_convolve     - product integration of a tabulated f against the
                      Erlang(order, rate) density; exact for piecewise
                      linear f however sharp the density is.
"""

from __future__ import annotations

import numpy as np
from scipy import signal
from scipy.integrate import cumulative_trapezoid
from scipy.special import gammainc


def trapezoid_convolve(f: np.ndarray, g: np.ndarray, h: float) -> np.ndarray:
    """h * [sum_{j=0..k} f_j g_{k-j} - (f_0 g_k + f_k g_0) / 2] for every k."""
    m = f.size
    # scipy picks direct or zero-padded FFT evaluation of the same sums
    full = signal.convolve(f, g, mode="full")[:m]
    out = h * (full - 0.5 * (f[0] * g + f * g[0]))
    out[0] = 0.0  # empty integral
    return out


def running_integral(f: np.ndarray, h: float) -> np.ndarray:
    return cumulative_trapezoid(f, dx=h, initial=0.0)


def erlang_weights(
    order: int, rate: float, h: float, m: int
) -> tuple[np.ndarray, np.ndarray]:
    """
    Node weights for linear interpolation of f against the Erlang density.
    Returns (w, a) with (f * F)(x_k) = (w conv f)_k - a_k f_0.
    """
    x = h * np.arange(m)
    cdf = gammainc(order, rate * x)
    cdf_next = gammainc(order + 1, rate * x)
    mass = np.diff(cdf)
    # first moment of the density about the left node of each cell
    moment = (order / rate) * np.diff(cdf_next) - x[:-1] * mass
    left = mass - moment / h
    right = moment / h
    w = np.zeros(m)
    w[:-1] += left
    w[1:] += right
    return w, np.append(left, 0.0)


def erlang_convolve(f: np.ndarray, order: int, rate: float, h: float) -> np.ndarray:
    m = f.size
    w, a = erlang_weights(order, rate, h, m)
    out = signal.convolve(w, f, mode="full")[:m] - a * f[0]
    out[0] = 0.0
    return out
