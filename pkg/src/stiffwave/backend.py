"""Kernel backend selection: compiled extension with pure-Python fallback.

The compiled extension ``stiffwave._kernels`` is preferred when it imports;
otherwise the numpy/scipy kernels in ``stiffwave._kernels_py`` are used.
Set ``STIFFWAVE_KERNELS=python`` or ``STIFFWAVE_KERNELS=compiled`` to force
a backend (the latter raises if the extension is missing).

``set_backend`` exists for benchmarking and tests; it mutates module state
and is not meant to be called concurrently with running solvers.
"""

from __future__ import annotations

import os

import numpy as np

from . import _kernels_py as _python

try:
    from . import _kernels as _compiled
except ImportError:
    _compiled = None

HAS_COMPILED = _compiled is not None

_BACKENDS = {"python": _python}
if HAS_COMPILED:
    _BACKENDS["compiled"] = _compiled


def _initial_backend():
    requested = os.environ.get("STIFFWAVE_KERNELS", "").strip().lower()
    if requested in ("", "auto"):
        return _compiled if HAS_COMPILED else _python
    if requested == "python":
        return _python
    if requested == "compiled":
        if not HAS_COMPILED:
            raise ImportError(
                "STIFFWAVE_KERNELS=compiled but the stiffwave._kernels "
                "extension is not built")
        return _compiled
    raise ValueError(f"unknown STIFFWAVE_KERNELS value {requested!r}")


_active = _initial_backend()


def active_name() -> str:
    """Name of the backend currently in use ('compiled' or 'python')."""
    return _active.NAME


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_BACKENDS))


def get_backend(name: str):
    """Return the raw kernel module for ``name`` (for benchmarks/tests)."""
    try:
        return _BACKENDS[name]
    except KeyError:
        raise ValueError(f"backend {name!r} not available; "
                         f"have {available_backends()}") from None


def set_backend(name: str) -> str:
    """Switch the active backend; returns the previous backend name."""
    global _active
    previous = _active.NAME
    _active = get_backend(name)
    return previous


def recover(v_ext, u_ext, dx: float, dt: float):
    v_ext = np.ascontiguousarray(v_ext, dtype=np.float64)
    u_ext = np.ascontiguousarray(u_ext, dtype=np.float64)
    return _active.recover(v_ext, u_ext, float(dx), float(dt))


def tridiag_spd_solve(diag, off, rhs):
    diag = np.ascontiguousarray(diag, dtype=np.float64)
    off = np.ascontiguousarray(off, dtype=np.float64)
    rhs = np.ascontiguousarray(rhs, dtype=np.float64)
    return _active.tridiag_spd_solve(diag, off, rhs)


def block_tridiag_solve(sub, diag, sup, rhs):
    sub = np.ascontiguousarray(sub, dtype=np.float64)
    diag = np.ascontiguousarray(diag, dtype=np.float64)
    sup = np.ascontiguousarray(sup, dtype=np.float64)
    rhs = np.ascontiguousarray(rhs, dtype=np.float64)
    return _active.block_tridiag_solve(sub, diag, sup, rhs)
