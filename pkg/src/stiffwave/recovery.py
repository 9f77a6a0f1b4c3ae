"""Cellwise derivative recovery with Lax-Friedrichs-type viscosity.

For interior cells the recovered derivatives are

    vx_i = (v_{i+1} - v_{i-1}) / (2 dx) + (u_{i+1} + u_{i-1} - 2 u_i) / (2 dt)
    ux_i = (u_{i+1} - u_{i-1}) / (2 dx) + (v_{i+1} + v_{i-1} - 2 v_i) / (2 dt)

and boundary cells see ghost values supplied by a swappable policy.  The
default reflects v oddly (honoring the homogeneous Dirichlet condition)
and u evenly (the vanishing-stiffness limit has u_x = 0, so a zero-Neumann
ghost preserves that structure).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import backend
from .model import Grid, State

__all__ = [
    "RecoveredDerivatives",
    "ReflectGhosts",
    "ExtrapolateGhosts",
    "REFLECT",
    "recover_derivatives",
]


@dataclass(frozen=True)
class RecoveredDerivatives:
    """Cellwise-constant approximations to (v_x, u_x) at one time level."""

    vx: np.ndarray
    ux: np.ndarray


@dataclass(frozen=True)
class ReflectGhosts:
    """Mirror ghost cells with per-component signs (default: v odd, u even)."""

    v_sign: float = -1.0
    u_sign: float = 1.0

    def __call__(self, v: np.ndarray, u: np.ndarray):
        v_ext = np.empty(v.shape[0] + 2)
        u_ext = np.empty(u.shape[0] + 2)
        v_ext[1:-1] = v
        u_ext[1:-1] = u
        v_ext[0] = self.v_sign * v[0]
        v_ext[-1] = self.v_sign * v[-1]
        u_ext[0] = self.u_sign * u[0]
        u_ext[-1] = self.u_sign * u[-1]
        return v_ext, u_ext


@dataclass(frozen=True)
class ExtrapolateGhosts:
    """Linear extrapolation ghosts, an A/B alternative to reflection."""

    def __call__(self, v: np.ndarray, u: np.ndarray):
        v_ext = np.empty(v.shape[0] + 2)
        u_ext = np.empty(u.shape[0] + 2)
        v_ext[1:-1] = v
        u_ext[1:-1] = u
        v_ext[0] = 2.0 * v[0] - v[1]
        v_ext[-1] = 2.0 * v[-1] - v[-2]
        u_ext[0] = 2.0 * u[0] - u[1]
        u_ext[-1] = 2.0 * u[-1] - u[-2]
        return v_ext, u_ext


REFLECT = ReflectGhosts()


def recover_derivatives(state: State, grid: Grid, dt: float,
                        ghosts=REFLECT) -> RecoveredDerivatives:
    """Recover cellwise derivatives from a state.

    Parameters
    ----------
    state : State
        Cell values matching ``grid``.
    grid : Grid
        The uniform grid.
    dt : float
        Time-step entering the viscosity terms.  Uses the actual step's dt
        so clipped steps stay well-defined.
    ghosts : callable
        Policy mapping (v, u) to ghost-extended arrays of length n + 2.
    """
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    if state.v.shape[0] != grid.n_cells:
        raise ValueError(
            f"state has {state.v.shape[0]} cells, grid has {grid.n_cells}")
    v_ext, u_ext = ghosts(state.v, state.u)
    vx, ux = backend.recover(v_ext, u_ext, grid.dx, dt)
    return RecoveredDerivatives(vx=vx, ux=ux)
