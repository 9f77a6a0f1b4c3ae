"""Command-line interface.

Subcommands:

* ``run``    one simulation; writes a one-row CSV and prints a summary.
* ``study``  a convergence sweep; emits the study CSV (and optional
             per-(scheme, eps) plot tables).
* ``verify`` the verification suites; prints a pass/fail table and can
             emit a machine-readable CSV.
* ``bench``  kernel/backend benchmark (compiled vs python).

Any flag of ``run``/``study`` may come from a `key = value` config file
(``--config``/``--spec``); explicit command-line flags win.  Exit codes:
0 success, 1 usage error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from . import backend
from .harness import (ErrorRecord, StudySpec, emit_csv, emit_plot_tables,
                      l2_error, render_csv, run_study)
from .model import case_kink, case_smooth, make_grid
from .schemes import SCHEME_KINDS, SchemeConfig, run
from .verification import SUITE_NAMES, run_suite

USAGE_ERROR = 1
NUMERICAL_FAILURE = 2

_CASES = {"smooth": case_smooth, "kink": case_kink}


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; the CLI contract wants 1.
    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(f"{self.prog}: error: {message}")


def parse_config_file(path) -> dict[str, str]:
    """Parse a line-oriented `key = value` file; `#` starts a comment."""
    values: dict[str, str] = {}
    text = Path(path).read_text(encoding="utf-8")
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def _merge_config(args, config: dict[str, str], fields: dict[str, type]):
    """Fill argparse defaults from a config file (CLI flags override)."""
    for key, value in config.items():
        if key not in fields:
            raise ValueError(f"unknown config key {key!r}")
        if getattr(args, key, None) is None:
            setattr(args, key, fields[key](value))


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(tok) for tok in str(text).split(",") if tok.strip())


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(tok) for tok in str(text).split(",") if tok.strip())


def _schemes(text: str) -> tuple[str, ...]:
    return tuple(tok.strip() for tok in str(text).split(",") if tok.strip())


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="stiffwave",
                     description="Solvers for the stiff linearized p-system.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_run = sub.add_parser("run", help="run a single simulation")
    p_run.add_argument("--scheme", choices=SCHEME_KINDS)
    p_run.add_argument("--case", choices=tuple(_CASES))
    p_run.add_argument("--eps", type=float)
    p_run.add_argument("--nx", type=int)
    p_run.add_argument("--cfl-hat", dest="cfl_hat", type=float)
    p_run.add_argument("--t-final", dest="t_final", type=float)
    p_run.add_argument("--config", type=Path, help="key = value config file")
    p_run.add_argument("--out", type=Path, help="write a one-row CSV here")

    p_study = sub.add_parser("study", help="run a convergence study")
    p_study.add_argument("--scheme", type=_schemes,
                         help="comma list, e.g. ap,imex")
    p_study.add_argument("--case", choices=tuple(_CASES))
    p_study.add_argument("--eps", type=_floats, help="comma list")
    p_study.add_argument("--nx", type=_ints, help="comma list")
    p_study.add_argument("--cfl-hat", dest="cfl_hat", type=float)
    p_study.add_argument("--t-final", dest="t_final", type=float)
    p_study.add_argument("--spec", type=Path, help="key = value config file")
    p_study.add_argument("--out", type=Path, help="CSV destination (default stdout)")
    p_study.add_argument("--workers", type=int, default=1)
    p_study.add_argument("--emit-plot-table", dest="plot_dir", type=Path,
                         help="also write per-(scheme,eps) nx/error tables here")

    p_verify = sub.add_parser("verify", help="run verification suites")
    p_verify.add_argument("--suite", default="all",
                          choices=SUITE_NAMES + ("all",))
    p_verify.add_argument("--seed", type=int, default=20240817)
    p_verify.add_argument("--out", type=Path, help="machine-readable CSV")

    p_bench = sub.add_parser("bench", help="compare kernel backends")
    p_bench.add_argument("--nx", type=int, default=4096)
    p_bench.add_argument("--repeats", type=int, default=5)
    return parser


_RUN_FIELDS = {"scheme": str, "case": str, "eps": float, "nx": int,
               "cfl_hat": float, "t_final": float}
_STUDY_FIELDS = {"scheme": _schemes, "case": str, "eps": _floats, "nx": _ints,
                 "cfl_hat": float, "t_final": float}


def _cmd_run(args) -> int:
    if args.config is not None:
        _merge_config(args, parse_config_file(args.config), _RUN_FIELDS)
    missing = [k for k in ("scheme", "eps", "nx") if getattr(args, k) is None]
    if missing:
        print(f"stiffwave run: missing required option(s): "
              f"{', '.join('--' + m for m in missing)}", file=sys.stderr)
        return USAGE_ERROR
    case_name = args.case or "smooth"
    cfl_hat = args.cfl_hat if args.cfl_hat is not None else 0.8
    t_final = args.t_final if args.t_final is not None else 0.1
    case = _CASES[case_name](args.eps)
    config = SchemeConfig(kind=args.scheme, eps=args.eps, t_final=t_final,
                          case=case, n_cells=args.nx, cfl_hat=cfl_hat)
    result = run(config)
    grid = make_grid(args.nx)
    err_v, err_u, err_c = l2_error(result.final_state, case, grid)
    record = ErrorRecord(scheme=args.scheme, case=case_name, eps=args.eps,
                         n_cells=args.nx, dt=result.dt_used, err_v=err_v,
                         err_u=err_u, err_combined=err_c,
                         flags=tuple(sorted(result.flags)))
    text = render_csv([record])
    if args.out is not None:
        emit_csv([record], args.out)
    else:
        sys.stdout.write(text)
    print(f"{args.scheme} {case_name} eps={args.eps:g} nx={args.nx} "
          f"steps={result.steps_taken} dt={result.dt_used:g} "
          f"err={err_c:.6e}", file=sys.stderr)
    if result.flags or not math.isfinite(err_c):
        print(f"numerical failure: flags={sorted(result.flags)}",
              file=sys.stderr)
        return NUMERICAL_FAILURE
    return 0


def _cmd_study(args) -> int:
    if args.spec is not None:
        _merge_config(args, parse_config_file(args.spec), _STUDY_FIELDS)
    kwargs = {}
    if args.scheme is not None:
        kwargs["schemes"] = args.scheme
    if args.case is not None:
        kwargs["case"] = args.case
    if args.eps is not None:
        kwargs["eps_list"] = args.eps
    if args.nx is not None:
        kwargs["nx_list"] = args.nx
    if args.cfl_hat is not None:
        kwargs["cfl_hat"] = args.cfl_hat
    if args.t_final is not None:
        kwargs["t_final"] = args.t_final
    spec = StudySpec(**kwargs)
    records = run_study(spec, workers=args.workers)
    if args.out is not None:
        emit_csv(records, args.out)
    else:
        sys.stdout.write(render_csv(records))
    if args.plot_dir is not None:
        emit_plot_tables(records, args.plot_dir)
    return 0


def _cmd_verify(args) -> int:
    names = SUITE_NAMES if args.suite == "all" else (args.suite,)
    rows = []
    for name in names:
        rows.extend(run_suite(name, seed=args.seed))
    width = max(len(f"{r.suite}.{r.check}") for r in rows)
    all_passed = True
    for row in rows:
        status = "PASS" if row.passed else "FAIL"
        all_passed = all_passed and row.passed
        print(f"{row.suite + '.' + row.check:<{width}}  "
              f"value={row.value:12.5e}  threshold={row.threshold:12.5e}  {status}")
    if args.out is not None:
        lines = ["suite,check,value,threshold,passed"]
        for row in rows:
            lines.append(f"{row.suite},{row.check},{row.value!r},"
                         f"{row.threshold!r},{str(row.passed).lower()}")
        Path(args.out).write_bytes(("\n".join(lines) + "\n").encode("utf-8"))
    return 0 if all_passed else NUMERICAL_FAILURE


def _cmd_bench(args) -> int:
    from .bench import format_table, run_benchmark
    rows = run_benchmark(nx=args.nx, repeats=args.repeats)
    print(format_table(rows))
    if not backend.HAS_COMPILED:
        print("note: compiled kernels unavailable; python backend only",
              file=sys.stderr)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        if isinstance(exc.code, str):
            print(exc.code, file=sys.stderr)
            return USAGE_ERROR
        return USAGE_ERROR if exc.code else 0
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "study":
            return _cmd_study(args)
        if args.command == "verify":
            return _cmd_verify(args)
        if args.command == "bench":
            return _cmd_bench(args)
    except (ValueError, OSError) as exc:
        print(f"stiffwave: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except Exception as exc:  # numerical failures from the solver layer
        print(f"stiffwave: numerical failure: {exc}", file=sys.stderr)
        return NUMERICAL_FAILURE
    return USAGE_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
