# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: sector evolution and classical-map iteration.

Mirrors ``_fallback`` exactly.  The classical-map functions use the same
libm calls in the same order as the Python versions (and the build
forbids FMA contraction) so orbits match bitwise across backends.
Sector evolution dispatches straight to BLAS gemv per sector, skipping
the per-step array plumbing the NumPy route pays for.
"""

import numpy as np

cimport cython
from libc.math cimport cos, floor, log, sin, sqrt
from scipy.linalg.cython_blas cimport zgemv

cdef double TWO_PI = 2.0 * 3.14159265358979323846


def evolve_sector_vectors(blocks, vectors, Py_ssize_t steps):
    """Repeated per-sector matrix-vector application, see the fallback."""
    cdef double complex[:, :, ::1] b = np.ascontiguousarray(blocks, dtype=np.complex128)
    out_arr = np.array(vectors, dtype=np.complex128, copy=True, order="C")
    scratch_arr = np.empty_like(out_arr)
    cdef double complex[:, ::1] x = out_arr
    cdef double complex[:, ::1] y = scratch_arr
    cdef double complex[:, ::1] tmp
    cdef Py_ssize_t n = x.shape[0], m = x.shape[1]
    cdef int mi = <int> m, inc = 1
    cdef double complex one = 1.0, zero = 0.0
    # Row-major storage read as column-major is the transpose, so 'T'
    # makes gemv apply the matrix itself.
    cdef char *trans = b"T"
    cdef Py_ssize_t s, k
    if b.shape[0] != n or b.shape[1] != m or b.shape[2] != m:
        raise ValueError("blocks and vectors have incompatible shapes")
    for s in range(steps):
        # GIL released over the heavy part so worker threads overlap.
        with nogil:
            for k in range(n):
                zgemv(trans, &mi, &mi, &one, &b[k, 0, 0], &mi,
                      &x[k, 0], &inc, &zero, &y[k, 0], &inc)
        tmp = x
        x = y
        y = tmp
    if steps % 2 == 1:
        return scratch_arr
    return out_arr


def harper_orbit(double q0, double p0, double g, double tau, Py_ssize_t n_steps):
    """Torus-map orbit, (n_steps + 1, 2) array of (q, p) rows."""
    out_arr = np.empty((n_steps + 1, 2), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double q = q0 - floor(q0)
    cdef double p = p0 - floor(p0)
    cdef Py_ssize_t i
    out[0, 0] = q
    out[0, 1] = p
    for i in range(1, n_steps + 1):
        q = q - tau * sin(TWO_PI * p)
        q = q - floor(q)
        p = p + tau * g * sin(TWO_PI * q)
        p = p - floor(p)
        out[i, 0] = q
        out[i, 1] = p
    return out_arr


def harper_log_stretch(double q0, double p0, double g, double tau, Py_ssize_t n_steps):
    """Per-step tangent-vector log growth factors along an orbit."""
    out_arr = np.empty(n_steps, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double q = q0 - floor(q0)
    cdef double p = p0 - floor(p0)
    cdef double v1 = sqrt(0.5)
    cdef double v2 = sqrt(0.5)
    cdef double a, c, w1, w2, r
    cdef Py_ssize_t i
    for i in range(n_steps):
        a = -TWO_PI * tau * cos(TWO_PI * p)
        q = q - tau * sin(TWO_PI * p)
        q = q - floor(q)
        c = TWO_PI * tau * g * cos(TWO_PI * q)
        p = p + tau * g * sin(TWO_PI * q)
        p = p - floor(p)
        w1 = v1 + a * v2
        w2 = c * w1 + v2
        r = sqrt(w1 * w1 + w2 * w2)
        out[i] = log(r)
        v1 = w1 / r
        v2 = w2 / r
    return out_arr
