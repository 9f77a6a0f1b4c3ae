"""Convergence-study runner, error metrics, and CSV emission.

Study cells (scheme, eps, nx) are independent; records are always emitted
in lexicographic (scheme, eps, nx) order so the CSV is byte-identical
regardless of worker count.  Floats are written in shortest round-trip
decimal form.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .model import CaseDefinition, Grid, case_kink, case_smooth, make_grid
from .schemes import SCHEME_KINDS, SchemeConfig, run

__all__ = [
    "CSV_HEADER",
    "StudySpec",
    "ErrorRecord",
    "l2_error",
    "observed_order",
    "run_study",
    "emit_csv",
    "emit_plot_tables",
]

CSV_HEADER = "scheme,case,eps,nx,dt,err_v,err_u,err_combined,observed_order,flags"

DEFAULT_EPS = (1e-1, 1e-2, 1e-4, 1e-8)
DEFAULT_NX = tuple(2**k for k in range(1, 13))  # 2 .. 4096

_CASES = {"smooth": case_smooth, "kink": case_kink}


def l2_error(state, case: CaseDefinition, grid: Grid):
    """Midpoint-quadrature l2 errors against the exact solution.

    Returns (err_v, err_u, err_combined) with
    err = sqrt(dx * sum_i (w_i - w_exact(xbar_i, t))^2).
    """
    dx = grid.dx
    dv = state.v - np.asarray(case.v_exact(grid.midpoints, state.time))
    du = state.u - np.asarray(case.u_exact(grid.midpoints, state.time))
    err_v = math.sqrt(dx * float(np.dot(dv, dv)))
    err_u = math.sqrt(dx * float(np.dot(du, du)))
    return err_v, err_u, math.sqrt(err_v**2 + err_u**2)


def observed_order(errors):
    """Observed orders log2(err(N)/err(2N)) for adjacent refinement pairs.

    ``errors`` is a sequence of (nx, err) with nx doubling.  Zero or
    non-finite errors produce ``None`` entries instead of NaNs.
    """
    errors = list(errors)
    if len(errors) < 2:
        raise ValueError("need at least two (nx, err) points")
    orders = []
    for (n_coarse, e_coarse), (n_fine, e_fine) in zip(errors, errors[1:]):
        if n_fine != 2 * n_coarse:
            raise ValueError(f"nx must double: got {n_coarse} -> {n_fine}")
        if (e_coarse <= 0.0 or e_fine <= 0.0
                or not math.isfinite(e_coarse) or not math.isfinite(e_fine)):
            orders.append(None)
        else:
            orders.append(math.log2(e_coarse / e_fine))
    return orders


@dataclass(frozen=True)
class StudySpec:
    """A convergence sweep over (scheme, eps, nx)."""

    schemes: tuple[str, ...] = SCHEME_KINDS
    case: str = "smooth"
    eps_list: tuple[float, ...] = DEFAULT_EPS
    nx_list: tuple[int, ...] = DEFAULT_NX
    cfl_hat: float = 0.8
    t_final: float = 0.1

    def __post_init__(self):
        unknown = set(self.schemes) - set(SCHEME_KINDS)
        if unknown:
            raise ValueError(f"unknown schemes {sorted(unknown)}")
        if self.case not in _CASES:
            raise ValueError(f"unknown case {self.case!r}")
        if any(not 0.0 < e < 1.0 for e in self.eps_list):
            raise ValueError("eps values must lie in (0, 1)")
        if list(self.nx_list) != sorted(set(self.nx_list)):
            raise ValueError("nx_list must be strictly increasing")


@dataclass(frozen=True)
class ErrorRecord:
    """One study cell: errors, observed order vs the previous nx, flags."""

    scheme: str
    case: str
    eps: float
    n_cells: int
    dt: float
    err_v: float
    err_u: float
    err_combined: float
    observed_order: float | None = None
    flags: tuple[str, ...] = ()


def _run_cell(scheme, case_name, eps, nx, cfl_hat, t_final):
    case = _CASES[case_name](eps)
    config = SchemeConfig(kind=scheme, eps=eps, t_final=t_final, case=case,
                          n_cells=nx, cfl_hat=cfl_hat)
    result = run(config)
    grid = make_grid(nx)
    err_v, err_u, err_c = l2_error(result.final_state, case, grid)
    flags = set(result.flags)
    if not (math.isfinite(err_v) and math.isfinite(err_u)):
        flags.add("non_finite_error")
    return ErrorRecord(
        scheme=scheme, case=case_name, eps=eps, n_cells=nx, dt=result.dt_used,
        err_v=err_v, err_u=err_u, err_combined=err_c,
        flags=tuple(sorted(flags)),
    )


def run_study(spec: StudySpec, workers: int = 1) -> list[ErrorRecord]:
    """Run every (scheme, eps, nx) cell of the spec.

    Cells run independently (optionally in a thread pool); the returned
    records are sorted by (scheme, eps, nx) and carry observed orders
    against the previous nx of the same (scheme, eps) series.  A flagged
    run (for instance an ill-conditioned Implicit Euler solve) produces a
    flagged record, never an aborted study.
    """
    cells = [(s, spec.case, e, n, spec.cfl_hat, spec.t_final)
             for s in sorted(spec.schemes)
             for e in sorted(spec.eps_list)
             for n in spec.nx_list]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda c: _run_cell(*c), cells))
    else:
        results = [_run_cell(*c) for c in cells]

    by_key = {(r.scheme, r.eps, r.n_cells): r for r in results}
    records = []
    for scheme in sorted(spec.schemes):
        for eps in sorted(spec.eps_list):
            previous = None
            for nx in spec.nx_list:
                rec = by_key[(scheme, eps, nx)]
                order = None
                flags = set(rec.flags)
                if previous is not None and nx == 2 * previous.n_cells:
                    pair = [(previous.n_cells, previous.err_combined),
                            (nx, rec.err_combined)]
                    order = observed_order(pair)[0]
                    if order is None:
                        if rec.err_combined == 0.0 or previous.err_combined == 0.0:
                            flags.add("zero_error")
                records.append(ErrorRecord(
                    scheme=rec.scheme, case=rec.case, eps=rec.eps,
                    n_cells=rec.n_cells, dt=rec.dt, err_v=rec.err_v,
                    err_u=rec.err_u, err_combined=rec.err_combined,
                    observed_order=order, flags=tuple(sorted(flags)),
                ))
                previous = rec
    return records


def _fmt(value) -> str:
    """Shortest round-trip decimal for floats, empty string for None."""
    if value is None:
        return ""
    if isinstance(value, float):
        if not math.isfinite(value):
            return "nan" if math.isnan(value) else repr(value)
        return repr(value)
    return str(value)


def _record_row(rec: ErrorRecord) -> str:
    return ",".join([
        rec.scheme,
        rec.case,
        _fmt(rec.eps),
        str(rec.n_cells),
        _fmt(rec.dt),
        _fmt(rec.err_v),
        _fmt(rec.err_u),
        _fmt(rec.err_combined),
        _fmt(rec.observed_order),
        ";".join(rec.flags),
    ])


def render_csv(records) -> str:
    records = list(records)
    if not records:
        raise ValueError("no records to emit")
    lines = [CSV_HEADER]
    lines.extend(_record_row(r) for r in records)
    return "\n".join(lines) + "\n"


def emit_csv(records, destination) -> Path:
    """Write records as CSV (UTF-8, LF line endings) to ``destination``."""
    text = render_csv(records)
    path = Path(destination)
    try:
        path.write_bytes(text.encode("utf-8"))
    except OSError as exc:
        raise OSError(f"failed writing CSV to {path}: {exc}") from exc
    return path


def emit_plot_tables(records, directory) -> list[Path]:
    """Per-(scheme, eps) two-column `nx error` whitespace tables."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    groups: dict[tuple, list[ErrorRecord]] = {}
    for rec in records:
        groups.setdefault((rec.scheme, rec.case, rec.eps), []).append(rec)
    paths = []
    for (scheme, case_name, eps), recs in sorted(groups.items()):
        path = directory / f"{scheme}_{case_name}_eps{_fmt(eps)}.dat"
        lines = ["nx error"]
        for rec in sorted(recs, key=lambda r: r.n_cells):
            lines.append(f"{rec.n_cells} {_fmt(rec.err_combined)}")
        path.write_bytes(("\n".join(lines) + "\n").encode("utf-8"))
        paths.append(path)
    return paths
