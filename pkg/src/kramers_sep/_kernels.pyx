# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled stencil kernels for the finite-difference Kramers stepper."""
from cython.parallel cimport prange

import numpy as np


def half_weights(y):
    """exp(+-(y[j+1]^2 - y[j]^2) / 4) at the half nodes j + 1/2."""
    y = np.asarray(y, dtype=float)
    a = 0.25 * (y[1:] * y[1:] - y[:-1] * y[:-1])
    return np.exp(a), np.exp(-a)


def rhs_interior(const double[:, ::1] u, const double[::1] x, const double[::1] y,
                 double dx, double dy, double nu, double k, double[:, ::1] out,
                 int num_threads=0):
    """out = nu d/dy(u_y + y u) - y u_x + k x u_y on interior nodes.

    The y-flux is written as nu M d/dy(u/M) with M = exp(-y^2/2) and
    M at half nodes taken as the geometric mean, so the Maxwellian is a
    discrete steady state.  The remaining terms use second-order central
    differences.  Boundary rows/columns of ``out`` are left untouched;
    ``u`` is indexed [ix, iy].
    """
    cdef Py_ssize_t nx = u.shape[0], ny = u.shape[1]
    cdef Py_ssize_t i, j
    cdef double idy2 = 1.0 / (dy * dy), i2dx = 0.5 / dx, i2dy = 0.5 / dy
    ep_arr, em_arr = half_weights(y)
    cdef const double[::1] ep = ep_arr
    cdef const double[::1] em = em_arr
    if num_threads <= 0:
        num_threads = 0
    if num_threads == 0:
        for i in prange(1, nx - 1, nogil=True, schedule="static"):
            for j in range(1, ny - 1):
                out[i, j] = (nu * idy2 * (u[i, j + 1] * ep[j] - u[i, j] * (em[j] + ep[j - 1])
                                          + u[i, j - 1] * em[j - 1])
                             - y[j] * (u[i + 1, j] - u[i - 1, j]) * i2dx
                             + k * x[i] * (u[i, j + 1] - u[i, j - 1]) * i2dy)
    else:
        for i in prange(1, nx - 1, nogil=True, schedule="static", num_threads=num_threads):
            for j in range(1, ny - 1):
                out[i, j] = (nu * idy2 * (u[i, j + 1] * ep[j] - u[i, j] * (em[j] + ep[j - 1])
                                          + u[i, j - 1] * em[j - 1])
                             - y[j] * (u[i + 1, j] - u[i - 1, j]) * i2dx
                             + k * x[i] * (u[i, j + 1] - u[i, j - 1]) * i2dy)
    return np.asarray(out)


def axpy_interior(double[:, ::1] dst, const double[:, ::1] u, double a,
                  const double[:, ::1] kv, int num_threads=0):
    """dst = u + a * kv on interior nodes."""
    cdef Py_ssize_t nx = u.shape[0], ny = u.shape[1]
    cdef Py_ssize_t i, j
    if num_threads <= 0:
        for i in prange(1, nx - 1, nogil=True, schedule="static"):
            for j in range(1, ny - 1):
                dst[i, j] = u[i, j] + a * kv[i, j]
    else:
        for i in prange(1, nx - 1, nogil=True, schedule="static", num_threads=num_threads):
            for j in range(1, ny - 1):
                dst[i, j] = u[i, j] + a * kv[i, j]
    return np.asarray(dst)
