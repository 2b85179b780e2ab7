# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled implementation of the hot numerical kernels.

Twin of ``_numpy_backend``: same functions, same semantics, C loops.
Gaussian smoothing kernel K(x) = c1 * exp(-c2 * x**2 / T**2), all
integrals over [0, T].
"""
from libc.math cimport erf, exp, sqrt, M_PI

import numpy as np

NAME = "compiled"


cdef inline double _cross(double u, double v, double c1, double c2, double T) nogil:
    cdef double m = 0.5 * (u + v)
    cdef double d = u - v
    cdef double s = sqrt(2.0 * c2) / T
    cdef double amp = 0.5 * c1 * c1 * T * sqrt(M_PI / (2.0 * c2))
    return amp * exp(-0.5 * c2 * d * d / (T * T)) * (erf(s * (T - m)) + erf(s * m))


cdef inline double _g(double x, double y, double c1, double c2, double T) nogil:
    cdef double m = 0.5 * (x + y)
    cdef double d = x - y
    cdef double s = sqrt(2.0 * c2) / T
    cdef double b2 = 2.0 * c2 / (T * T)
    cdef double bump = (T * T / (4.0 * c2)) * (exp(-b2 * m * m) - exp(-b2 * (T - m) * (T - m)))
    cdef double tail = sqrt(M_PI / (8.0 * c2)) * T * d * 0.5 * (erf(s * (T - m)) + erf(s * m))
    return exp(-0.5 * c2 * d * d / (T * T)) * (bump - tail)


def cross_integral(double u, double v, double c1, double c2, double T):
    return _cross(u, v, c1, c2, T)


def point_cross_sum(double u, const double[::1] y, double c1, double c2, double T):
    cdef double acc = 0.0
    cdef Py_ssize_t j
    with nogil:
        for j in range(y.shape[0]):
            acc += _cross(u, y[j], c1, c2, T)
    return acc


def gram_sum(const double[::1] x, const double[::1] y, double c1, double c2, double T):
    cdef double acc = 0.0
    cdef Py_ssize_t i, j
    with nogil:
        for i in range(x.shape[0]):
            for j in range(y.shape[0]):
                acc += _cross(x[i], y[j], c1, c2, T)
    return acc


def g_pair(double x, double y, double c1, double c2, double T):
    return _g(x, y, c1, c2, T)


def g_rowsums(const double[::1] x, const double[::1] y, double c1, double c2, double T):
    out_arr = np.zeros(x.shape[0], dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double acc
    cdef Py_ssize_t a, j
    with nogil:
        for a in range(x.shape[0]):
            acc = 0.0
            for j in range(y.shape[0]):
                acc += _g(x[a], y[j], c1, c2, T)
            out[a] = acc
    return out_arr


def curve_values(const double[::1] grid, const double[::1] events, double c1, double c2, double T):
    out_arr = np.zeros(grid.shape[0], dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double acc, d
    cdef double w = c2 / (T * T)
    cdef Py_ssize_t i, j
    with nogil:
        for i in range(grid.shape[0]):
            acc = 0.0
            for j in range(events.shape[0]):
                d = grid[i] - events[j]
                acc += c1 * exp(-w * d * d)
            out[i] = acc
    return out_arr
