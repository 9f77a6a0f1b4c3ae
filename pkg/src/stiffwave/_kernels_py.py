"""Pure-Python kernel implementations (numpy + scipy banded solvers).

These mirror the compiled kernels in ``stiffwave._kernels`` and are used
when the extension is unavailable or when ``STIFFWAVE_KERNELS=python`` is
set.  The stencil kernel is written with the exact same per-element
operation order as the compiled one so both produce identical bits; the
linear solvers delegate to LAPACK banded routines and agree with the
compiled elimination to rounding.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import solve_banded, solveh_banded

NAME = "python"


def recover(v_ext, u_ext, dx, dt):
    """Lax-Friedrichs-type derivative recovery on ghost-extended arrays.

    ``v_ext`` and ``u_ext`` have length ``n + 2`` (one ghost per side);
    returns the cellwise derivatives (vx, ux), each of length ``n``.
    """
    vx = (v_ext[2:] - v_ext[:-2]) / (2.0 * dx) \
        + (u_ext[2:] + u_ext[:-2] - 2.0 * u_ext[1:-1]) / (2.0 * dt)
    ux = (u_ext[2:] - u_ext[:-2]) / (2.0 * dx) \
        + (v_ext[2:] + v_ext[:-2] - 2.0 * v_ext[1:-1]) / (2.0 * dt)
    return vx, ux


def tridiag_spd_solve(diag, off, rhs):
    """Solve the symmetric positive-definite tridiagonal system.

    ``diag`` has length n, ``off`` length n - 1 (the common sub/super
    diagonal), ``rhs`` shape (n,) or (n, k).
    """
    n = diag.shape[0]
    if n == 1:
        return rhs / diag[0]
    ab = np.zeros((2, n))
    ab[0, 1:] = off
    ab[1, :] = diag
    return solveh_banded(ab, rhs, lower=False)


def block_tridiag_solve(sub, diag, sup, rhs):
    """Solve a block-tridiagonal system with 2x2 blocks.

    ``sub``, ``diag``, ``sup`` have shape (n, 2, 2); ``sub[0]`` and
    ``sup[-1]`` are ignored.  ``rhs`` has shape (n, 2, k).  Returns an
    array of the same shape as ``rhs``.  Interleaving the two components
    gives a scalar banded matrix with bandwidth 3, solved by LAPACK with
    partial pivoting.
    """
    n = diag.shape[0]
    k = rhs.shape[2]
    m = 2 * n
    ab = np.zeros((7, m))
    for a in range(2):
        for b in range(2):
            ab[3 + a - b, b::2] = diag[:, a, b]
            if n > 1:
                ab[5 + a - b, b:m - 2:2] = sub[1:, a, b]
                ab[1 + a - b, b + 2::2] = sup[:-1, a, b]
    x = solve_banded((3, 3), ab, rhs.reshape(m, k))
    return x.reshape(n, 2, k)
