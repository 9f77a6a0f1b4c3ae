"""Empirical verification suites for the solver's structural guarantees.

Each suite turns one theoretical property into a falsifiable numerical
check: single-step consistency scalings for v and u, eps-independent
conditioning of the elliptic solve, the eps^2 multiscale structure of the
manufactured solutions, and admissibility of the flux splitting.  Pass
criteria are log-log slopes with stated windows, boundedness ratios, or
unit-constant bound envelopes with a 10x safety factor.  On these
manufactured cases the envelope checks measure constants set by the
forcing's 20*pi temporal scales, so they report values well above 10
honestly rather than hiding them; the slope and boundedness checks carry
the substantive scaling content.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .elliptic import POINCARE_CONST, assemble, conditioning_probe, solve
from .harness import l2_error
from .model import (CaseDefinition, State, case_kink, case_smooth,
                    check_splitting_admissible, make_grid)
from .schemes import ap_step

__all__ = [
    "EPS_MAX",
    "ScalingReport",
    "CheckRow",
    "consistency_v_suite",
    "consistency_u_suite",
    "multiscale_suite",
    "conditioning_suite",
    "splitting_suite",
    "run_suite",
    "SUITE_NAMES",
]

# Largest admissible stiffness for the consistency suites; the analysis
# assumes eps bounded away from 1 and eps <= dt.
EPS_MAX = 0.5

ENVELOPE_FACTOR = 10.0


@dataclass(frozen=True)
class ScalingReport:
    """A measured error scaling against one parameter axis.

    ``samples`` holds (parameter, error) pairs; ``fitted_slope`` is the
    least-squares slope in log-log space.  ``passed`` combines the slope
    window (when a target is set) with the envelope check (when bounds are
    given).
    """

    axis: str
    samples: tuple[tuple[float, float], ...]
    fitted_slope: float
    target_slope: float | None
    tolerance: float | None
    passed: bool
    envelope_ok: bool = True
    bounds: tuple[float, ...] = ()
    details: dict = field(default_factory=dict, repr=False)


@dataclass(frozen=True)
class CheckRow:
    """One machine-readable verification outcome."""

    suite: str
    check: str
    value: float
    threshold: float
    passed: bool


def _fit_slope(params, errors) -> float:
    params = np.asarray(params, dtype=float)
    errors = np.asarray(errors, dtype=float)
    mask = (errors > 0.0) & np.isfinite(errors)
    if mask.sum() < 2:
        return math.nan
    coeffs = np.polyfit(np.log(params[mask]), np.log(errors[mask]), 1)
    return float(coeffs[0])


def _exact_state(case: CaseDefinition, grid, t: float) -> State:
    return State(
        v=np.asarray(case.v_exact(grid.midpoints, t), dtype=np.float64),
        u=np.asarray(case.u_exact(grid.midpoints, t), dtype=np.float64),
        time=t,
    )


def one_step_errors(case: CaseDefinition, nx: int, cfl_hat: float = 0.8,
                    t_anchor: float = 0.05):
    """Single hybrid-scheme step from exact data; returns (err_v, err_u, dt, dx)."""
    grid = make_grid(nx)
    dt = cfl_hat * grid.dx
    state = _exact_state(case, grid, t_anchor)
    stepped = ap_step(state, grid, dt, case.eps, case)
    err_v, err_u, _ = l2_error(stepped, case, grid)
    return err_v, err_u, dt, grid.dx


def bound_v(eps: float, dx: float, dt: float) -> float:
    """Unit-constant single-step consistency envelope for v."""
    return eps**2 * dt**2 + eps**4 + eps**3 * dx + eps**6 / dx**2


def bound_u(eps: float, dx: float, dt: float) -> float:
    """Unit-constant single-step consistency envelope for u."""
    return dt**2 + eps**4 / dx**2 + eps**2


def _require_regime(eps: float, dt: float):
    if eps > EPS_MAX:
        raise ValueError(
            f"consistency suites require eps <= {EPS_MAX}, got {eps}")
    if eps > dt:
        raise ValueError(
            f"consistency suites require eps <= dt (got eps={eps}, dt={dt}); "
            "the analysis does not cover eps > dt")


def consistency_v_suite(eps_fixed: float = 1e-2,
                        nx_list=(8, 16, 32, 64),
                        nx_fixed: int = 256,
                        eps_list=(1e-3, 1e-4, 1e-5),
                        cfl_hat: float = 0.8,
                        t_anchor: float = 0.05) -> tuple[ScalingReport, ScalingReport]:
    """Single-step v-consistency in two regimes.

    Regime A sweeps the mesh at fixed eps and checks the 10x unit-constant
    envelope eps^2 dt^2 + eps^4 + eps^3 dx + eps^6/dx^2 (slope reported).
    Regime B sweeps eps at a fixed mesh and checks the error decays at
    least quadratically in eps.  Configurations with eps > dt are refused.
    """
    case = case_smooth(eps_fixed)
    samples_a, bounds_a = [], []
    for nx in nx_list:
        dt = cfl_hat / nx
        _require_regime(eps_fixed, dt)
        err_v, _, dt, dx = one_step_errors(case, nx, cfl_hat, t_anchor)
        samples_a.append((dx, err_v))
        bounds_a.append(bound_v(eps_fixed, dx, dt))
    envelope_a = all(e <= ENVELOPE_FACTOR * b
                     for (_, e), b in zip(samples_a, bounds_a))
    slope_a = _fit_slope([s[0] for s in samples_a], [s[1] for s in samples_a])
    report_a = ScalingReport(
        axis="dx", samples=tuple(samples_a), fitted_slope=slope_a,
        target_slope=None, tolerance=None, passed=envelope_a,
        envelope_ok=envelope_a, bounds=tuple(bounds_a),
        details={"eps": eps_fixed, "regime": "A"},
    )

    samples_b, bounds_b = [], []
    for eps in eps_list:
        dt = cfl_hat / nx_fixed
        _require_regime(eps, dt)
        case_b = case_smooth(eps)
        err_v, _, dt, dx = one_step_errors(case_b, nx_fixed, cfl_hat, t_anchor)
        samples_b.append((eps, err_v))
        bounds_b.append(bound_v(eps, dx, dt))
    envelope_b = all(e <= ENVELOPE_FACTOR * b
                     for (_, e), b in zip(samples_b, bounds_b))
    slope_b = _fit_slope([s[0] for s in samples_b], [s[1] for s in samples_b])
    passed_b = envelope_b and slope_b >= 2.0 - 0.3
    report_b = ScalingReport(
        axis="eps", samples=tuple(samples_b), fitted_slope=slope_b,
        target_slope=2.0, tolerance=0.3, passed=passed_b,
        envelope_ok=envelope_b, bounds=tuple(bounds_b),
        details={"nx": nx_fixed, "regime": "B",
                 "note": "slope >= 2 means err/eps^2 stays bounded"},
    )
    return report_a, report_b


def consistency_u_suite(eps_fixed: float = 1e-6,
                        nx_list=(64, 128, 256, 512, 1024),
                        envelope_points=((1e-2, 64),),
                        cfl_hat: float = 0.8,
                        t_anchor: float = 0.0625) -> tuple[ScalingReport, ScalingReport]:
    """Single-step u-consistency: dt^2 slope at small eps plus boundedness.

    At eps = 1e-6 the dt^2 term dominates the bound dt^2 + eps^4/dx^2 +
    eps^2, so the fitted slope against dt must sit in 2 +- 0.3 and the
    ratio error / max(dt^2, eps^2) must stay bounded across the sweep.
    The anchor must avoid zeros of the solution's second time derivative
    (t = 0.05 is one), otherwise the quadratic term vanishes and the
    slope test degenerates; 0.0625 is generic.

    The second report carries the 10x unit-constant envelope at the listed
    (eps, nx) points.  The true constant here is |u_tt|/2, of size
    (20 pi)^2/2 for this case, so the unit-constant envelope is expected
    to fail; it is reported rather than hidden.
    """
    samples, bounds = [], []
    for nx in nx_list:
        dt = cfl_hat / nx
        _require_regime(eps_fixed, dt)
        case = case_smooth(eps_fixed)
        _, err_u, dt, dx = one_step_errors(case, nx, cfl_hat, t_anchor)
        samples.append((dt, err_u))
        bounds.append(bound_u(eps_fixed, dx, dt))
    slope = _fit_slope([s[0] for s in samples], [s[1] for s in samples])
    scaled = [e / max(dt * dt, eps_fixed * eps_fixed) for dt, e in samples]
    bounded = max(scaled) <= 3.0 * min(scaled)
    passed = bounded and abs(slope - 2.0) <= 0.3
    report_slope = ScalingReport(
        axis="dt", samples=tuple(samples), fitted_slope=slope,
        target_slope=2.0, tolerance=0.3, passed=passed,
        envelope_ok=bounded, bounds=tuple(bounds),
        details={"eps": eps_fixed, "scaled_ratios": tuple(scaled)},
    )

    samples_e, bounds_e = [], []
    for eps, nx in envelope_points:
        dt = cfl_hat / nx
        _require_regime(eps, dt)
        case = case_smooth(eps)
        _, err_u, dt, dx = one_step_errors(case, nx, cfl_hat, t_anchor)
        samples_e.append((eps, err_u))
        bounds_e.append(bound_u(eps, dx, dt))
    envelope_ok = all(e <= ENVELOPE_FACTOR * b
                      for (_, e), b in zip(samples_e, bounds_e))
    report_env = ScalingReport(
        axis="eps", samples=tuple(samples_e), fitted_slope=math.nan,
        target_slope=None, tolerance=None, passed=envelope_ok,
        envelope_ok=envelope_ok, bounds=tuple(bounds_e),
        details={"points": tuple(envelope_points)},
    )
    return report_slope, report_env


def _complex_step_ux(case: CaseDefinition, x: np.ndarray, t: float,
                     h: float = 1e-30) -> np.ndarray:
    """Spatial derivative of u via complex-step differentiation.

    Immune to subtractive cancellation, so the eps^2-scale variation of u
    is resolved even when it sits far below the O(1) background.  Near the
    kink the step differentiates the active branch, which is exactly the
    one-sided derivative.
    """
    return np.imag(case.u_exact(x + 1j * h, t)) / h


@dataclass(frozen=True)
class MultiscaleReport:
    """Measured sup|v|/eps^2 and sup|u_x|/eps^2 across an eps sweep."""

    case: str
    eps_list: tuple[float, ...]
    times: tuple[float, ...]
    v_ratio_bound: float
    ux_ratio_bound: float
    v_ratios: tuple[float, ...]
    ux_ratios: tuple[float, ...]
    passed: bool


def multiscale_suite(case_names=("smooth", "kink"),
                     eps_list=(1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8),
                     times=(0.0, 0.05, 0.1),
                     n_samples: int = 10000) -> list[MultiscaleReport]:
    """Check that sup|v|/eps^2 and sup|u_x|/eps^2 are bounded uniformly.

    The bound is calibrated once from the largest eps (with a small
    headroom for the finite sampling) and reused for every smaller eps.
    """
    constructors = {"smooth": case_smooth, "kink": case_kink}
    eps_list = tuple(sorted(eps_list, reverse=True))
    x = np.linspace(0.0, 1.0, n_samples)
    reports = []
    for name in case_names:
        make_case = constructors[name]
        v_ratios, ux_ratios = [], []
        for eps in eps_list:
            case = make_case(eps)
            e2 = eps * eps
            v_max = max(float(np.max(np.abs(case.v_exact(x, t)))) for t in times)
            ux_max = max(float(np.max(np.abs(_complex_step_ux(case, x, t))))
                         for t in times)
            v_ratios.append(v_max / e2)
            ux_ratios.append(ux_max / e2)
        headroom = 1.0 + 1e-3
        v_bound = v_ratios[0] * headroom + 1e-12
        ux_bound = ux_ratios[0] * headroom + 1e-12
        passed = all(r <= v_bound for r in v_ratios) and \
            all(r <= ux_bound for r in ux_ratios)
        reports.append(MultiscaleReport(
            case=name, eps_list=eps_list, times=tuple(times),
            v_ratio_bound=v_bound, ux_ratio_bound=ux_bound,
            v_ratios=tuple(v_ratios), ux_ratios=tuple(ux_ratios),
            passed=passed,
        ))
    return reports


@dataclass(frozen=True)
class ConditioningSweep:
    """Worst observed conditioning constants across a gamma sweep."""

    gamma_list: tuple[float, ...]
    worst_energy_constant: float
    worst_h1_constant: float
    energy_slack: float
    passed: bool


def conditioning_suite(gamma_list=tuple(10.0**k for k in range(-8, 9, 2)),
                       n_probes: int = 20, n_cells: int = 64,
                       seed: int = 20240817) -> ConditioningSweep:
    """Random-probe conditioning across 16 orders of magnitude in gamma.

    For each gamma the energy-norm bound must hold with constant one (up
    to 1e-10 relative slack); additionally the H_0^1-framed bound with
    factor M/gamma = 1 + C_PF^2/gamma is checked.
    """
    rng = np.random.default_rng(seed)
    grid = make_grid(n_cells)
    slack = 1e-10
    worst_energy = 0.0
    worst_h1 = 0.0
    passed = True
    stiffness = assemble(1.0, grid)          # gamma=1, used for H1 norms
    mass_free = assemble(0.0, grid)
    h1_diag = stiffness.diag - mass_free.diag
    h1_off = stiffness.off - mass_free.off

    def h1_norm(nodal):
        padded = np.concatenate(([0.0], nodal, [0.0]))
        return math.sqrt(float(np.sum((padded[1:] - padded[:-1])**2 / grid.dx)))

    from . import backend

    def h1_dual(b):
        x = backend.tridiag_spd_solve(h1_diag, h1_off, b)
        return math.sqrt(float(np.dot(b, x)))

    for gamma in gamma_list:
        problem = assemble(gamma, grid)
        ratio_bound = 1.0 + POINCARE_CONST**2 / gamma
        for _ in range(n_probes):
            rhs = rng.standard_normal(problem.n_dof)
            pert = 1e-3 * rng.standard_normal(problem.n_dof)
            rep = conditioning_probe(problem, rhs, pert, slack=slack)
            const = rep.lhs / rep.rhs if rep.rhs > 0.0 else math.inf
            worst_energy = max(worst_energy, const)
            passed = passed and rep.passed

            v = solve(problem, rhs).nodal
            v_tilde = solve(problem, rhs + pert).nodal
            lhs_h1 = h1_norm(v - v_tilde) * h1_dual(rhs)
            rhs_h1 = ratio_bound * h1_dual(pert) * h1_norm(v)
            const_h1 = (lhs_h1 / rhs_h1) if rhs_h1 > 0.0 else math.inf
            worst_h1 = max(worst_h1, const_h1)
            passed = passed and const_h1 <= 1.0 + slack
    return ConditioningSweep(
        gamma_list=tuple(gamma_list),
        worst_energy_constant=worst_energy,
        worst_h1_constant=worst_h1,
        energy_slack=slack,
        passed=passed,
    )


def splitting_identity_residual(n_samples: int, seed: int) -> float:
    """Worst relative residual of f_hat + f_tilde - f over random (w, eps)."""
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n_samples)
    u = rng.standard_normal(n_samples)
    eps = 10.0 ** rng.uniform(-8.0, 0.0, n_samples)
    fv, fu = -u, -v / eps**2
    hv, hu = -eps * u, -v / eps
    tv, tu = -(1.0 - eps) * u, -(1.0 - eps) * v / eps**2
    scale = np.maximum(np.hypot(fv, fu), np.finfo(float).tiny)
    return float(np.max(np.hypot(hv + tv - fv, hu + tu - fu) / scale))


def splitting_suite(eps_samples=(1e-4, 1e-2, 0.1, 0.5, 0.9, 0.99),
                    seed: int = 20240817):
    """Admissibility of the flux splitting plus the exact-sum identity."""
    report = check_splitting_admissible(eps_samples)
    worst = splitting_identity_residual(100000, seed)
    identity_ok = worst <= 8.0 * np.finfo(float).eps
    return report, worst, identity_ok


SUITE_NAMES = ("consistency_v", "consistency_u", "multiscale",
               "conditioning", "splitting")


def run_suite(name: str, seed: int = 20240817) -> list[CheckRow]:
    """Run one named suite and flatten its outcome into check rows."""
    rows: list[CheckRow] = []
    if name == "consistency_v":
        rep_a, rep_b = consistency_v_suite()
        worst_a = max((e / b for (_, e), b in zip(rep_a.samples, rep_a.bounds)),
                      default=0.0)
        rows.append(CheckRow("consistency_v", "regime_a_envelope", worst_a,
                             ENVELOPE_FACTOR, rep_a.envelope_ok))
        rows.append(CheckRow("consistency_v", "regime_a_slope_dx",
                             rep_a.fitted_slope, math.nan,
                             math.isfinite(rep_a.fitted_slope)))
        worst_b = max((e / b for (_, e), b in zip(rep_b.samples, rep_b.bounds)),
                      default=0.0)
        rows.append(CheckRow("consistency_v", "regime_b_envelope", worst_b,
                             ENVELOPE_FACTOR, rep_b.envelope_ok))
        rows.append(CheckRow("consistency_v", "regime_b_slope_eps",
                             rep_b.fitted_slope, 2.0 - 0.3,
                             rep_b.fitted_slope >= 2.0 - 0.3))
    elif name == "consistency_u":
        rep_slope, rep_env = consistency_u_suite()
        rows.append(CheckRow("consistency_u", "slope_dt", rep_slope.fitted_slope,
                             2.0, abs(rep_slope.fitted_slope - 2.0) <= 0.3))
        ratios = rep_slope.details["scaled_ratios"]
        rows.append(CheckRow("consistency_u", "scaled_error_bounded",
                             max(ratios) / min(ratios), 3.0,
                             max(ratios) <= 3.0 * min(ratios)))
        worst = max((e / b for (_, e), b in zip(rep_env.samples, rep_env.bounds)),
                    default=0.0)
        rows.append(CheckRow("consistency_u", "envelope", worst,
                             ENVELOPE_FACTOR, rep_env.passed))
    elif name == "multiscale":
        for rep in multiscale_suite():
            rows.append(CheckRow("multiscale", f"{rep.case}_v_ratio",
                                 max(rep.v_ratios), rep.v_ratio_bound, rep.passed))
            rows.append(CheckRow("multiscale", f"{rep.case}_ux_ratio",
                                 max(rep.ux_ratios), rep.ux_ratio_bound, rep.passed))
    elif name == "conditioning":
        sweep = conditioning_suite(seed=seed)
        rows.append(CheckRow("conditioning", "energy_constant",
                             sweep.worst_energy_constant,
                             1.0 + sweep.energy_slack, sweep.passed))
        rows.append(CheckRow("conditioning", "h1_constant",
                             sweep.worst_h1_constant, 1.0 + sweep.energy_slack,
                             sweep.worst_h1_constant <= 1.0 + sweep.energy_slack))
    elif name == "splitting":
        report, worst, identity_ok = splitting_suite(seed=seed)
        rows.append(CheckRow("splitting", "sum_identity", worst,
                             8.0 * float(np.finfo(float).eps), identity_ok))
        rows.append(CheckRow("splitting", "admissibility",
                             1.0 if report.passed else 0.0, 1.0, report.passed))
    else:
        raise ValueError(f"unknown suite {name!r}; expected one of "
                         f"{SUITE_NAMES + ('all',)}")
    return rows
