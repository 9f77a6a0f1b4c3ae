"""Linear finite elements for the weighted elliptic update equation.

The implicit reformulation of the time step yields

    -gamma * v_xx + v = data,      gamma = dt^2 (1 - eps)^2 / eps^2,

with homogeneous Dirichlet conditions, discretized by continuous piecewise
linears on the uniform grid.  All element integrals are exact (integrands
are polynomials of degree <= 2 against cellwise constants), so there is no
quadrature tolerance anywhere.  The tridiagonal SPD system is solved
directly in O(n).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import backend
from .exceptions import SolverError
from .model import Grid

__all__ = [
    "POINCARE_CONST",
    "EllipticProblem",
    "LoadFunctional",
    "FemSolution",
    "ConditioningReport",
    "gamma_of",
    "assemble",
    "assemble_load",
    "solve",
    "eval_midpoints",
    "fem_derivative",
    "energy_norm",
    "dual_norm",
    "conditioning_probe",
]

# Sharp Poincare-Friedrichs constant for H_0^1 on [0, 1].
POINCARE_CONST = 1.0 / math.pi


@dataclass(frozen=True)
class EllipticProblem:
    """Assembled tridiagonal system gamma*stiffness + mass.

    On a uniform grid the closed forms are
    ``diag = 2*gamma/dx + 4*dx/6`` and ``off = -gamma/dx + dx/6``.
    ``boundedness_const`` is gamma + C_PF^2, the continuity constant of the
    bilinear form on H_0^1.
    """

    gamma: float
    grid: Grid
    n_dof: int
    diag: np.ndarray
    off: np.ndarray
    poincare_const: float
    boundedness_const: float


@dataclass(frozen=True)
class LoadFunctional:
    """Cellwise-constant load data (iota1, iota2) for the weak form.

    The functional is  phi -> int iota1 * phi - dt^2 (1-eps) iota2 * phi_x.
    """

    iota1: np.ndarray
    iota2: np.ndarray
    dt: float
    eps: float


@dataclass(frozen=True)
class FemSolution:
    """Interior node values of the piecewise-linear solution (ends are 0)."""

    nodal: np.ndarray
    grid: Grid


def gamma_of(eps: float, dt: float) -> float:
    """Diffusion coefficient dt^2 (1 - eps)^2 / eps^2 of the implicit step."""
    eps = float(eps)
    dt = float(dt)
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must be in (0, 1), got {eps}")
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    return dt * dt * (1.0 - eps) ** 2 / (eps * eps)


def assemble(gamma: float, grid: Grid) -> EllipticProblem:
    """Assemble the tridiagonal system for the given diffusion coefficient."""
    gamma = float(gamma)
    if gamma < 0.0:
        raise ValueError(f"gamma must be nonnegative, got {gamma}")
    n_dof = grid.n_cells - 1
    dx = grid.dx
    diag = np.full(n_dof, 2.0 * gamma / dx + 4.0 * dx / 6.0)
    off = np.full(max(n_dof - 1, 0), -gamma / dx + dx / 6.0)
    return EllipticProblem(
        gamma=gamma,
        grid=grid,
        n_dof=n_dof,
        diag=diag,
        off=off,
        poincare_const=POINCARE_CONST,
        boundedness_const=gamma + POINCARE_CONST**2,
    )


def assemble_load(load: LoadFunctional, grid: Grid) -> np.ndarray:
    """Exact integrals of the cellwise-constant load against hat functions.

    For the interior node between cells L and R:

        b = dx/2 * (iota1_L + iota1_R) - dt^2 (1-eps) * (iota2_L - iota2_R)
    """
    n = grid.n_cells
    if load.iota1.shape[0] != n or load.iota2.shape[0] != n:
        raise ValueError("load vectors must have one entry per cell")
    dx = grid.dx
    scale = load.dt**2 * (1.0 - load.eps)
    i1, i2 = load.iota1, load.iota2
    return 0.5 * dx * (i1[:-1] + i1[1:]) - scale * (i2[:-1] - i2[1:])


def solve(problem: EllipticProblem, rhs: np.ndarray) -> FemSolution:
    """Direct O(n) solve of the assembled SPD tridiagonal system."""
    rhs = np.asarray(rhs, dtype=np.float64)
    if rhs.shape != (problem.n_dof,):
        raise ValueError(f"rhs must have shape ({problem.n_dof},), got {rhs.shape}")
    if not np.all(np.isfinite(rhs)):
        raise SolverError("non-finite right-hand side in elliptic solve")
    try:
        nodal = backend.tridiag_spd_solve(problem.diag, problem.off, rhs)
    except ZeroDivisionError as exc:  # impossible for SPD data
        raise SolverError(f"elliptic solve failed: {exc}") from exc
    if not np.all(np.isfinite(nodal)):
        raise SolverError("elliptic solve produced non-finite values")
    return FemSolution(nodal=nodal, grid=problem.grid)


def eval_midpoints(sol: FemSolution) -> np.ndarray:
    """Cell-midpoint values of the piecewise-linear solution."""
    padded = np.concatenate(([0.0], sol.nodal, [0.0]))
    return 0.5 * (padded[:-1] + padded[1:])


def fem_derivative(sol: FemSolution) -> np.ndarray:
    """Cellwise-constant slope of the piecewise-linear solution."""
    padded = np.concatenate(([0.0], sol.nodal, [0.0]))
    return (padded[1:] - padded[:-1]) / sol.grid.dx


def _nodal_of(sol_or_nodal, grid):
    if isinstance(sol_or_nodal, FemSolution):
        return sol_or_nodal.nodal, sol_or_nodal.grid
    if grid is None:
        raise ValueError("grid is required when passing a bare nodal vector")
    return np.asarray(sol_or_nodal, dtype=np.float64), grid


def energy_norm(sol_or_nodal, gamma: float, grid: Grid | None = None) -> float:
    """Weighted norm sqrt(||phi||_L2^2 + gamma ||phi_x||_L2^2).

    Exact for piecewise linears; satisfies energy_norm(phi)^2 ==
    phi^T A phi with A the assembled system for the same gamma.
    """
    if gamma < 0.0:
        raise ValueError(f"gamma must be nonnegative, got {gamma}")
    nodal, grid = _nodal_of(sol_or_nodal, grid)
    vals = np.concatenate(([0.0], nodal, [0.0]))
    a, b = vals[:-1], vals[1:]
    dx = grid.dx
    l2_sq = float(np.sum(dx * (a * a + a * b + b * b) / 3.0))
    h1_sq = float(np.sum((b - a) ** 2 / dx))
    return math.sqrt(l2_sq + gamma * h1_sq)


def dual_norm(problem: EllipticProblem, b: np.ndarray) -> float:
    """Discrete dual norm sqrt(b^T A^{-1} b), the exact Riesz representation
    of a load vector in the energy inner product."""
    b = np.asarray(b, dtype=np.float64)
    x = backend.tridiag_spd_solve(problem.diag, problem.off, b)
    return math.sqrt(float(np.dot(b, x)))


@dataclass(frozen=True)
class ConditioningReport:
    """Outcome of one conditioning probe.

    ``lhs = energy_norm(v - v~) * ||b||_*`` and
    ``rhs = ||p||_* * energy_norm(v)``; the solve is well-conditioned with
    constant one iff lhs <= rhs (up to the stated relative slack).
    """

    gamma: float
    lhs: float
    rhs: float
    relative_error: float
    relative_perturbation: float
    slack: float
    passed: bool


def conditioning_probe(problem: EllipticProblem, rhs: np.ndarray,
                       perturbation: np.ndarray,
                       slack: float = 1e-10) -> ConditioningReport:
    """Check the constant-one conditioning bound in the energy norm.

    Solves for ``rhs`` and ``rhs + perturbation`` and verifies

        energy_norm(v - v~) * ||rhs||_*  <=  ||perturbation||_* * energy_norm(v)

    within ``slack`` relative tolerance, where ||.||_* is the discrete dual
    norm.  Exact arithmetic makes this an identity.
    """
    rhs = np.asarray(rhs, dtype=np.float64)
    perturbation = np.asarray(perturbation, dtype=np.float64)
    if rhs.shape != (problem.n_dof,) or perturbation.shape != (problem.n_dof,):
        raise ValueError("rhs and perturbation must have length n_dof")
    if not np.any(rhs):
        raise ValueError("rhs must not be identically zero")
    v = solve(problem, rhs)
    v_tilde = solve(problem, rhs + perturbation)
    gamma = problem.gamma
    grid = problem.grid
    en_diff = energy_norm(v.nodal - v_tilde.nodal, gamma, grid)
    en_v = energy_norm(v, gamma)
    d_rhs = dual_norm(problem, rhs)
    d_pert = dual_norm(problem, perturbation)
    lhs = en_diff * d_rhs
    rhs_val = d_pert * en_v
    passed = lhs <= rhs_val * (1.0 + slack)
    return ConditioningReport(
        gamma=gamma,
        lhs=lhs,
        rhs=rhs_val,
        relative_error=en_diff / en_v if en_v > 0.0 else math.inf,
        relative_perturbation=d_pert / d_rhs if d_rhs > 0.0 else math.inf,
        slack=slack,
        passed=bool(passed),
    )
