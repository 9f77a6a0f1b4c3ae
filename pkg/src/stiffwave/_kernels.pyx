# cython: language_level=3
"""Compiled kernels for the hot per-step loops.

Mirrors stiffwave._kernels_py: same signatures, same per-element operation
order in the stencil kernel (bit-compatible), direct O(n) elimination for
the linear solvers.
"""

import numpy as np

cimport cython
from libc.math cimport fabs

NAME = "compiled"


@cython.boundscheck(False)
@cython.wraparound(False)
def recover(double[::1] v_ext, double[::1] u_ext, double dx, double dt):
    """Lax-Friedrichs-type derivative recovery on ghost-extended arrays."""
    cdef Py_ssize_t n = v_ext.shape[0] - 2
    cdef Py_ssize_t i
    vx_arr = np.empty(n)
    ux_arr = np.empty(n)
    cdef double[::1] vx = vx_arr
    cdef double[::1] ux = ux_arr
    for i in range(n):
        vx[i] = (v_ext[i + 2] - v_ext[i]) / (2.0 * dx) \
            + (u_ext[i + 2] + u_ext[i] - 2.0 * u_ext[i + 1]) / (2.0 * dt)
        ux[i] = (u_ext[i + 2] - u_ext[i]) / (2.0 * dx) \
            + (v_ext[i + 2] + v_ext[i] - 2.0 * v_ext[i + 1]) / (2.0 * dt)
    return vx_arr, ux_arr


@cython.boundscheck(False)
@cython.wraparound(False)
def tridiag_spd_solve(double[::1] diag, double[::1] off, rhs):
    """Thomas-algorithm solve of a symmetric tridiagonal SPD system.

    ``rhs`` may be (n,) or (n, k); the factorization is shared between
    right-hand sides.
    """
    cdef Py_ssize_t n = diag.shape[0]
    rhs_arr = np.asarray(rhs, dtype=np.float64)
    squeeze = rhs_arr.ndim == 1
    if squeeze:
        rhs_arr = rhs_arr[:, None]
    x_arr = np.array(rhs_arr, order="C", copy=True)
    cdef double[:, ::1] x = x_arr
    cdef Py_ssize_t k = x_arr.shape[1]
    cdef Py_ssize_t i, j
    work_arr = np.empty(n)
    cdef double[::1] cp = work_arr
    cdef double piv, m

    piv = diag[0]
    if piv == 0.0:
        raise ZeroDivisionError("zero pivot in tridiagonal solve")
    cp[0] = off[0] / piv if n > 1 else 0.0
    for j in range(k):
        x[0, j] = x[0, j] / piv
    for i in range(1, n):
        piv = diag[i] - off[i - 1] * cp[i - 1]
        if piv == 0.0:
            raise ZeroDivisionError("zero pivot in tridiagonal solve")
        if i < n - 1:
            cp[i] = off[i] / piv
        for j in range(k):
            x[i, j] = (x[i, j] - off[i - 1] * x[i - 1, j]) / piv
    for i in range(n - 2, -1, -1):
        for j in range(k):
            x[i, j] = x[i, j] - cp[i] * x[i + 1, j]
    return x_arr[:, 0] if squeeze else x_arr


@cython.boundscheck(False)
@cython.wraparound(False)
def block_tridiag_solve(double[:, :, ::1] sub, double[:, :, ::1] diag,
                        double[:, :, ::1] sup, double[:, :, ::1] rhs):
    """Block LU elimination (no pivoting) for 2x2 block-tridiagonal systems.

    Shapes as in the python fallback: blocks (n, 2, 2), rhs (n, 2, k);
    ``sub[0]`` and ``sup[-1]`` are ignored.
    """
    cdef Py_ssize_t n = diag.shape[0]
    cdef Py_ssize_t k = rhs.shape[2]
    cdef Py_ssize_t i, j
    delta_arr = np.empty((n, 2, 2))
    y_arr = np.array(np.asarray(rhs), order="C", copy=True)
    x_arr = np.empty((n, 2, k))
    cdef double[:, :, ::1] delta = delta_arr
    cdef double[:, :, ::1] y = y_arr
    cdef double[:, :, ::1] x = x_arr
    cdef double d00, d01, d10, d11, det
    cdef double i00, i01, i10, i11
    cdef double m00, m01, m10, m11
    cdef double yv, yu

    delta[0, 0, 0] = diag[0, 0, 0]
    delta[0, 0, 1] = diag[0, 0, 1]
    delta[0, 1, 0] = diag[0, 1, 0]
    delta[0, 1, 1] = diag[0, 1, 1]
    for i in range(1, n):
        d00 = delta[i - 1, 0, 0]
        d01 = delta[i - 1, 0, 1]
        d10 = delta[i - 1, 1, 0]
        d11 = delta[i - 1, 1, 1]
        det = d00 * d11 - d01 * d10
        if det == 0.0:
            raise ZeroDivisionError("singular pivot block in block solve")
        i00 = d11 / det
        i01 = -d01 / det
        i10 = -d10 / det
        i11 = d00 / det
        # multiplier M = sub[i] @ inv(delta[i-1])
        m00 = sub[i, 0, 0] * i00 + sub[i, 0, 1] * i10
        m01 = sub[i, 0, 0] * i01 + sub[i, 0, 1] * i11
        m10 = sub[i, 1, 0] * i00 + sub[i, 1, 1] * i10
        m11 = sub[i, 1, 0] * i01 + sub[i, 1, 1] * i11
        delta[i, 0, 0] = diag[i, 0, 0] - (m00 * sup[i - 1, 0, 0] + m01 * sup[i - 1, 1, 0])
        delta[i, 0, 1] = diag[i, 0, 1] - (m00 * sup[i - 1, 0, 1] + m01 * sup[i - 1, 1, 1])
        delta[i, 1, 0] = diag[i, 1, 0] - (m10 * sup[i - 1, 0, 0] + m11 * sup[i - 1, 1, 0])
        delta[i, 1, 1] = diag[i, 1, 1] - (m10 * sup[i - 1, 0, 1] + m11 * sup[i - 1, 1, 1])
        for j in range(k):
            yv = y[i - 1, 0, j]
            yu = y[i - 1, 1, j]
            y[i, 0, j] = y[i, 0, j] - (m00 * yv + m01 * yu)
            y[i, 1, j] = y[i, 1, j] - (m10 * yv + m11 * yu)

    for i in range(n - 1, -1, -1):
        d00 = delta[i, 0, 0]
        d01 = delta[i, 0, 1]
        d10 = delta[i, 1, 0]
        d11 = delta[i, 1, 1]
        det = d00 * d11 - d01 * d10
        if det == 0.0:
            raise ZeroDivisionError("singular pivot block in block solve")
        i00 = d11 / det
        i01 = -d01 / det
        i10 = -d10 / det
        i11 = d00 / det
        for j in range(k):
            yv = y[i, 0, j]
            yu = y[i, 1, j]
            if i < n - 1:
                yv = yv - (sup[i, 0, 0] * x[i + 1, 0, j] + sup[i, 0, 1] * x[i + 1, 1, j])
                yu = yu - (sup[i, 1, 0] * x[i + 1, 0, j] + sup[i, 1, 1] * x[i + 1, 1, j])
            x[i, 0, j] = i00 * yv + i01 * yu
            x[i, 1, j] = i10 * yv + i11 * yu
    return x_arr
