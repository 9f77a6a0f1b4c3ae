"""Problem definitions: grids, states, the split flux, and manufactured cases.

The governing system on `\\Omega = [x_left, x_right]` is the linearized
p-system with stiffness parameter ``eps``:

    v_t - u_x           = 0
    u_t - v_x / eps**2  = g(x, t)

with homogeneous Dirichlet data ``v = 0`` on both endpoints.  Wave speeds
are ``+-1/eps``, so the flux is split into a non-stiff part with speeds
``+-1`` (treated explicitly) and a stiff remainder (treated implicitly).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "Grid",
    "State",
    "SplitFlux",
    "CaseDefinition",
    "SplittingReport",
    "make_grid",
    "flux_split",
    "check_splitting_admissible",
    "case_smooth",
    "case_kink",
]


@dataclass(frozen=True)
class Grid:
    """Uniform 1D cell partition of an interval.

    ``midpoints[i] = edges[i] + dx/2`` and ``dx = (x_right - x_left)/n_cells``
    hold exactly by construction.
    """

    n_cells: int
    domain: tuple[float, float]
    dx: float
    midpoints: np.ndarray
    edges: np.ndarray


@dataclass(frozen=True)
class State:
    """Piecewise-constant cell values (v_i, u_i) at one time level."""

    v: np.ndarray
    u: np.ndarray
    time: float

    def __post_init__(self):
        if self.v.shape != self.u.shape or self.v.ndim != 1:
            raise ValueError("v and u must be 1D arrays of identical length")
        if self.time < 0.0:
            raise ValueError("time must be nonnegative")


def make_grid(n_cells: int, domain: tuple[float, float] = (0.0, 1.0)) -> Grid:
    """Build a uniform grid with ``n_cells`` cells on ``domain``.

    Parameters
    ----------
    n_cells : int
        Number of cells, at least 2.
    domain : (float, float)
        Interval endpoints, ``x_left < x_right``.
    """
    n_cells = int(n_cells)
    if n_cells < 2:
        raise ValueError(f"n_cells must be >= 2, got {n_cells}")
    x_left, x_right = float(domain[0]), float(domain[1])
    if not x_left < x_right:
        raise ValueError(f"degenerate domain [{x_left}, {x_right}]")
    dx = (x_right - x_left) / n_cells
    edges = x_left + dx * np.arange(n_cells + 1)
    midpoints = edges[:-1] + dx / 2.0
    return Grid(n_cells=n_cells, domain=(x_left, x_right), dx=dx,
                midpoints=midpoints, edges=edges)


@dataclass(frozen=True)
class SplitFlux:
    """The flux triple (f, f_hat, f_tilde) for a given ``eps``.

    With the exponent choice a = b = 1:

        f(w)       = (-u,            -v/eps^2)
        f_hat(w)   = (-eps*u,        -v/eps)            non-stiff, speeds +-1
        f_tilde(w) = (-(1-eps)*u,    -(1-eps)*v/eps^2)  stiff

    ``f_hat + f_tilde == f`` componentwise for every state.  ``eps = 1`` is
    admitted (f_tilde vanishes identically); the time-stepping schemes
    themselves require ``eps < 1``.
    """

    eps: float

    def __post_init__(self):
        if not 0.0 < self.eps <= 1.0:
            raise ValueError(f"eps must be in (0, 1], got {self.eps}")

    def total(self, v, u):
        return -np.asarray(u), -np.asarray(v) / self.eps**2

    def nonstiff(self, v, u):
        return -self.eps * np.asarray(u), -np.asarray(v) / self.eps

    def stiff(self, v, u):
        c = 1.0 - self.eps
        return -c * np.asarray(u), -c * np.asarray(v) / self.eps**2

    def total_matrix(self) -> np.ndarray:
        return np.array([[0.0, -1.0], [-1.0 / self.eps**2, 0.0]])

    def nonstiff_matrix(self) -> np.ndarray:
        return np.array([[0.0, -self.eps], [-1.0 / self.eps, 0.0]])

    def stiff_matrix(self) -> np.ndarray:
        c = 1.0 - self.eps
        return np.array([[0.0, -c], [-c / self.eps**2, 0.0]])

    def eigenvalues_total(self) -> tuple[float, float]:
        return (-1.0 / self.eps, 1.0 / self.eps)

    def eigenvalues_nonstiff(self) -> tuple[float, float]:
        return (-1.0, 1.0)

    def eigenvalues_stiff(self) -> tuple[float, float]:
        lam = (1.0 - self.eps) / self.eps
        return (-lam, lam)


def flux_split(eps: float) -> SplitFlux:
    """Construct the a = b = 1 flux splitting for stiffness ``eps``."""
    return SplitFlux(eps=float(eps))


@dataclass(frozen=True)
class SplittingReport:
    """Numerical admissibility check of the splitting, one entry per sample.

    The four criteria: (1) both split Jacobians have real distinct
    eigenvalues, (2) the non-stiff eigenvalues have magnitude one,
    (3) ||f_hat - f|| at the probe state decays as eps -> 1, and
    (4) eps^2 * ||f_tilde - f|| at the probe state decays as eps -> 0.
    """

    eps_samples: tuple[float, ...]
    probe_state: tuple[float, float]
    hyperbolic_ok: tuple[bool, ...]
    unit_speed_ok: tuple[bool, ...]
    nonstiff_residuals: tuple[float, ...]
    stiff_residuals: tuple[float, ...]
    passed_hyperbolic: bool
    passed_unit_speed: bool
    passed_nonstiff_limit: bool
    passed_stiff_limit: bool

    @property
    def passed(self) -> bool:
        return (self.passed_hyperbolic and self.passed_unit_speed
                and self.passed_nonstiff_limit and self.passed_stiff_limit)


def check_splitting_admissible(eps_samples, probe_state=(1.0, 1.0),
                               split_family: Callable[[float], SplitFlux] = flux_split,
                               ) -> SplittingReport:
    """Verify the splitting admissibility criteria at each sample ``eps``.

    ``probe_state`` may be any nonzero state; all flux maps are linear so a
    single probe suffices.
    """
    eps_samples = tuple(float(e) for e in eps_samples)
    if not eps_samples:
        raise ValueError("need at least one eps sample")
    if any(not 0.0 < e < 1.0 for e in eps_samples):
        raise ValueError("eps samples must lie in (0, 1)")
    pv, pu = float(probe_state[0]), float(probe_state[1])

    hyp, unit, res_hat, res_tilde = [], [], [], []
    for e in eps_samples:
        sp = split_family(e)
        ok = True
        for jac in (sp.nonstiff_matrix(), sp.stiff_matrix()):
            lam = np.linalg.eigvals(jac)
            real = np.max(np.abs(lam.imag)) <= 1e-14 * (1.0 + np.max(np.abs(lam)))
            distinct = abs(lam[0] - lam[1]) > 1e-14 * (1.0 + np.max(np.abs(lam)))
            ok = ok and real and distinct
        hyp.append(bool(ok))
        lam_hat = np.abs(np.linalg.eigvals(sp.nonstiff_matrix()))
        unit.append(bool(np.allclose(lam_hat, 1.0, rtol=0.0, atol=1e-14)))
        fv, fu = sp.total(pv, pu)
        hv, hu = sp.nonstiff(pv, pu)
        tv, tu = sp.stiff(pv, pu)
        res_hat.append(float(math.hypot(hv - fv, hu - fu)))
        res_tilde.append(float(e**2 * math.hypot(tv - fv, tu - fu)))

    # Criterion 3: residual shrinks toward eps = 1; criterion 4: the
    # eps^2-scaled residual shrinks toward eps = 0.  Closed forms give
    # ||f_hat - f|| = (1-eps)*|(pu, pv/eps^2)| and
    # eps^2*||f_tilde - f|| = |(eps^3*pu, eps*pv)|, both checked against a
    # generous envelope.
    wnorm = math.hypot(pv, pu)
    order = np.argsort(eps_samples)
    hat_sorted = np.asarray(res_hat)[order]          # eps ascending
    eps_sorted = np.asarray(eps_samples)[order]
    passed_hat = bool(np.all(np.diff(hat_sorted) <= 1e-12)
                      ) if len(eps_samples) > 1 else True
    passed_hat = passed_hat and bool(
        np.all(hat_sorted <= (1.0 - eps_sorted) * (1.0 + 1.0 / eps_sorted**2) * wnorm))
    tilde_sorted = np.asarray(res_tilde)[order]
    passed_tilde = bool(np.all(np.diff(tilde_sorted) >= -1e-12)
                        ) if len(eps_samples) > 1 else True
    passed_tilde = passed_tilde and bool(
        np.all(tilde_sorted <= 2.0 * eps_sorted * wnorm))

    return SplittingReport(
        eps_samples=eps_samples,
        probe_state=(pv, pu),
        hyperbolic_ok=tuple(hyp),
        unit_speed_ok=tuple(unit),
        nonstiff_residuals=tuple(res_hat),
        stiff_residuals=tuple(res_tilde),
        passed_hyperbolic=all(hyp),
        passed_unit_speed=all(unit),
        passed_nonstiff_limit=passed_hat,
        passed_stiff_limit=passed_tilde,
    )


@dataclass(frozen=True)
class CaseDefinition:
    """A manufactured exact solution (v, u) with its momentum forcing g.

    All three callables are vectorized over ``x`` and accept complex ``x``
    (branch decisions use the real part), which allows complex-step
    differentiation in the verification checks.  ``v_exact`` vanishes on
    both endpoints for every t >= 0.
    """

    name: str
    eps: float
    v_exact: Callable = field(repr=False)
    u_exact: Callable = field(repr=False)
    g: Callable = field(repr=False)


def _require_case_eps(eps: float) -> float:
    eps = float(eps)
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must be in (0, 1) for a test case, got {eps}")
    return eps


def case_smooth(eps: float) -> CaseDefinition:
    """Smooth manufactured solution.

    v = eps^2 * t * sin(2 pi x),  u = sin(20 pi t) - eps^2/(2 pi) * cos(2 pi x).

    The forcing is not free: substituting (v, u) into the momentum equation
    gives g = u_t - v_x/eps^2 = 20 pi cos(20 pi t) - 2 pi t cos(2 pi x).
    """
    eps = _require_case_eps(eps)
    e2 = eps * eps
    two_pi = 2.0 * math.pi

    def v_exact(x, t):
        x = np.asarray(x)
        return e2 * t * np.sin(two_pi * x)

    def u_exact(x, t):
        x = np.asarray(x)
        return math.sin(20.0 * math.pi * t) - (e2 / two_pi) * np.cos(two_pi * x)

    def g(x, t):
        x = np.asarray(x)
        return (20.0 * math.pi * math.cos(20.0 * math.pi * t)
                - two_pi * t * np.cos(two_pi * x))

    return CaseDefinition(name="smooth", eps=eps, v_exact=v_exact,
                          u_exact=u_exact, g=g)


def case_kink(eps: float) -> CaseDefinition:
    """Manufactured solution with a kink in v at x = 0.5.

    v = eps^2 * t * (x left of 0.5, 1 - x right of it); u is the matching
    C^1 piecewise parabola 1 + eps^2*(x^2/2 | -x^2/2 + x - 1/4).  As with
    the smooth case, g = u_t - v_x/eps^2 = -t left of the kink, +t right
    of it.
    """
    eps = _require_case_eps(eps)
    e2 = eps * eps

    def v_exact(x, t):
        x = np.asarray(x)
        left = np.real(x) < 0.5
        return e2 * t * np.where(left, x, 1.0 - x)

    def u_exact(x, t):
        x = np.asarray(x)
        left = np.real(x) < 0.5
        return 1.0 + e2 * np.where(left, 0.5 * x * x, -0.5 * x * x + x - 0.25)

    def g(x, t):
        x = np.asarray(x)
        left = np.real(x) < 0.5
        return np.where(left, -float(t), float(t))

    return CaseDefinition(name="kink", eps=eps, v_exact=v_exact,
                          u_exact=u_exact, g=g)
