"""stiffwave: solvers for the stiff linearized p-system.

A hybrid finite-volume/finite-element scheme built on a stiff/non-stiff
flux splitting, with Implicit Euler and naive IMEX baselines, a
manufactured-solution convergence harness, and verification suites for
the solver's conditioning and consistency guarantees.

The hot per-step kernels live in a compiled extension when available; a
numpy/scipy fallback is selected automatically at import (see
``stiffwave.backend``).
"""

from .backend import HAS_COMPILED, active_name
from .elliptic import (EllipticProblem, FemSolution, LoadFunctional, assemble,
                       assemble_load, conditioning_probe, energy_norm,
                       eval_midpoints, fem_derivative, gamma_of, solve)
from .exceptions import SolverError
from .harness import (ErrorRecord, StudySpec, emit_csv, l2_error,
                      observed_order, run_study)
from .model import (CaseDefinition, Grid, SplitFlux, State, case_kink,
                    case_smooth, check_splitting_admissible, flux_split,
                    make_grid)
from .recovery import RecoveredDerivatives, recover_derivatives
from .schemes import (RunResult, SchemeConfig, ap_step, imex_step,
                      implicit_euler_step, run)

__version__ = "0.1.0"

__all__ = [
    "CaseDefinition", "EllipticProblem", "ErrorRecord", "FemSolution",
    "Grid", "HAS_COMPILED", "LoadFunctional", "RecoveredDerivatives",
    "RunResult", "SchemeConfig", "SolverError", "SplitFlux", "State",
    "StudySpec", "active_name", "ap_step", "assemble", "assemble_load",
    "case_kink", "case_smooth", "check_splitting_admissible",
    "conditioning_probe", "emit_csv", "energy_norm", "eval_midpoints",
    "fem_derivative", "flux_split", "gamma_of", "imex_step",
    "implicit_euler_step", "l2_error", "make_grid", "observed_order",
    "recover_derivatives", "run", "run_study", "solve",
]
