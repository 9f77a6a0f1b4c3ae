"""Backend benchmark: compiled kernels versus the numpy/scipy fallback.

Times the three hot kernels on synthetic data of the requested size and a
full time-marching run per scheme, for every available backend.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import backend
from .model import case_smooth
from .schemes import SchemeConfig, run

__all__ = ["BenchRow", "run_benchmark", "format_table"]


@dataclass(frozen=True)
class BenchRow:
    name: str
    timings: dict[str, float]   # backend name -> best seconds per call


def _best_time(func, repeats: int) -> float:
    best = np.inf
    for _ in range(repeats):
        start = time.perf_counter()
        func()
        best = min(best, time.perf_counter() - start)
    return best


def _kernel_cases(nx: int):
    rng = np.random.default_rng(0)
    v_ext = rng.standard_normal(nx + 2)
    u_ext = rng.standard_normal(nx + 2)
    dx = 1.0 / nx
    dt = 0.8 * dx
    diag = np.full(nx - 1, 2.0 / dx + 4.0 * dx / 6.0)
    off = np.full(nx - 2, -1.0 / dx + dx / 6.0)
    rhs = rng.standard_normal(nx - 1)
    ident = np.eye(2)
    coupling = np.array([[0.0, -1.0], [-100.0, 0.0]])
    c = dt / (2.0 * dx)
    sub = np.tile(-c * coupling - 0.5 * ident, (nx, 1, 1))
    diag_b = np.tile(2.0 * ident, (nx, 1, 1))
    sup = np.tile(c * coupling - 0.5 * ident, (nx, 1, 1))
    sub[0] = 0.0
    sup[-1] = 0.0
    brhs = rng.standard_normal((nx, 2, 1))
    return {
        f"recover nx={nx}": lambda k: k.recover(v_ext, u_ext, dx, dt),
        f"tridiag_spd_solve n={nx - 1}": lambda k: k.tridiag_spd_solve(diag, off, rhs),
        f"block_tridiag_solve n={nx}": lambda k: k.block_tridiag_solve(
            sub, diag_b, sup, brhs),
    }


def run_benchmark(nx: int = 4096, repeats: int = 5) -> list[BenchRow]:
    rows = []
    names = backend.available_backends()
    for label, call in _kernel_cases(nx).items():
        timings = {}
        for name in names:
            kernels = backend.get_backend(name)
            call(kernels)  # warm up
            timings[name] = _best_time(lambda: call(kernels), repeats)
        rows.append(BenchRow(name=label, timings=timings))

    run_nx = min(nx, 1024)
    case = case_smooth(1e-2)
    for kind in ("ap", "imex", "implicit_euler"):
        config = SchemeConfig(kind=kind, eps=1e-2, t_final=0.1, case=case,
                              n_cells=run_nx)
        timings = {}
        previous = backend.active_name()
        try:
            for name in names:
                backend.set_backend(name)
                run(config)  # warm up
                timings[name] = _best_time(lambda: run(config), max(repeats // 2, 1))
        finally:
            backend.set_backend(previous)
        rows.append(BenchRow(name=f"run {kind} nx={run_nx}", timings=timings))
    return rows


def format_table(rows: list[BenchRow]) -> str:
    names = sorted({name for row in rows for name in row.timings})
    width = max(len(row.name) for row in rows)
    header = f"{'benchmark':<{width}}" + "".join(f"  {n:>12}" for n in names)
    if "compiled" in names and "python" in names:
        header += f"  {'speedup':>8}"
    lines = [header]
    for row in rows:
        line = f"{row.name:<{width}}"
        for name in names:
            t = row.timings.get(name)
            line += f"  {t * 1e6:>10.1f}us" if t is not None else f"  {'-':>12}"
        if "compiled" in row.timings and "python" in row.timings:
            line += f"  {row.timings['python'] / row.timings['compiled']:>7.2f}x"
        lines.append(line)
    return "\n".join(lines)
