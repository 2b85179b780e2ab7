"""NumPy implementation of the hot numerical kernels.

Same call surface as the compiled module ``_fastkernels``; the package
selects one of the two at import time (see ``ppdepth._backend``).

All functions assume a Gaussian smoothing kernel
``K(x) = c1 * exp(-c2 * x**2 / T**2)`` and integrate over ``[0, T]``.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.special import erf

NAME = "numpy"


def _cross_block(u: np.ndarray, v: np.ndarray, c1: float, c2: float, T: float) -> np.ndarray:
    """Broadcasted I(u, v) = int_0^T K(t-u) K(t-v) dt."""
    m = 0.5 * (u + v)
    d = u - v
    s = math.sqrt(2.0 * c2) / T
    amp = 0.5 * c1 * c1 * T * math.sqrt(math.pi / (2.0 * c2))
    return amp * np.exp(-0.5 * c2 * d * d / (T * T)) * (erf(s * (T - m)) + erf(s * m))


def cross_integral(u: float, v: float, c1: float, c2: float, T: float) -> float:
    return float(_cross_block(np.float64(u), np.float64(v), c1, c2, T))


def point_cross_sum(u: float, y: np.ndarray, c1: float, c2: float, T: float) -> float:
    """Sum over j of I(u, y[j])."""
    if y.size == 0:
        return 0.0
    return float(np.sum(_cross_block(np.float64(u), y, c1, c2, T)))


def gram_sum(x: np.ndarray, y: np.ndarray, c1: float, c2: float, T: float) -> float:
    """Sum over all (i, j) of I(x[i], y[j])."""
    if x.size == 0 or y.size == 0:
        return 0.0
    return float(np.sum(_cross_block(x[:, None], y[None, :], c1, c2, T)))


def _g_block(x: np.ndarray, y: np.ndarray, c1: float, c2: float, T: float) -> np.ndarray:
    """Broadcasted gradient pair term g(x, y); dI/du(u, v) = (2*c1^2*c2/T^2) * g(u, v)."""
    m = 0.5 * (x + y)
    d = x - y
    s = math.sqrt(2.0 * c2) / T
    b2 = 2.0 * c2 / (T * T)
    bump = (T * T / (4.0 * c2)) * (np.exp(-b2 * m * m) - np.exp(-b2 * (T - m) * (T - m)))
    tail = math.sqrt(math.pi / (8.0 * c2)) * T * d * 0.5 * (erf(s * (T - m)) + erf(s * m))
    return np.exp(-0.5 * c2 * d * d / (T * T)) * (bump - tail)


def g_pair(x: float, y: float, c1: float, c2: float, T: float) -> float:
    return float(_g_block(np.float64(x), np.float64(y), c1, c2, T))


def g_rowsums(x: np.ndarray, y: np.ndarray, c1: float, c2: float, T: float) -> np.ndarray:
    """out[a] = sum over j of g(x[a], y[j])."""
    out = np.zeros(x.size, dtype=np.float64)
    if x.size == 0 or y.size == 0:
        return out
    np.sum(_g_block(x[:, None], y[None, :], c1, c2, T), axis=1, out=out)
    return out


def curve_values(grid: np.ndarray, events: np.ndarray, c1: float, c2: float, T: float) -> np.ndarray:
    """Smoothed-process values f(t) = sum_i K(t - events[i]) on the grid."""
    if events.size == 0:
        return np.zeros(grid.size, dtype=np.float64)
    d = grid[:, None] - events[None, :]
    return np.sum(c1 * np.exp(-c2 * d * d / (T * T)), axis=1)
