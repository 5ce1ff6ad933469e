"""frachc: energy-stable BDF2 solver for the 1-D space-fractional
Cahn-Hilliard equation, with FFT-accelerated structured linear algebra and
block-preconditioned Newton-Krylov inner solves."""

from .model import (ModelParams, Discretization, Problem, ProblemKind,
                    SIGMA_STABLE_MIN, default_params, make_problem,
                    interior_nodes, gamma_fn)
from .frac_operator import (FracOperator, FracWeights, frac_weights,
                            scale_constant, build_operator, gershgorin_check)
from .structured import (SymmetricToeplitz, Circulant, SkewCirculant,
                         strang_circulant, strang_skew_circulant,
                         toeplitz_distance_bound, series_constant)
from .krylov import (KrylovConfig, BlockJacobian, BlockPreconditioner,
                     schur_polynomial, fgmres, dense_block_solve)
from .stepper import (NewtonConfig, SchemeState, first_step, residual,
                      newton_solve, run, StepFailureError, PRECOND_VARIANTS)
from .diagnostics import (RunRecord, ErrorReport, norm_p, norm_neg1,
                          discrete_energy, modified_energy, error_metrics,
                          convergence_order, iteration_stats)

__version__ = "0.1.0"

__all__ = [
    "ModelParams", "Discretization", "Problem", "ProblemKind",
    "SIGMA_STABLE_MIN", "default_params", "make_problem", "interior_nodes",
    "gamma_fn",
    "FracOperator", "FracWeights", "frac_weights", "scale_constant",
    "build_operator", "gershgorin_check",
    "SymmetricToeplitz", "Circulant", "SkewCirculant", "strang_circulant",
    "strang_skew_circulant", "toeplitz_distance_bound", "series_constant",
    "KrylovConfig", "BlockJacobian", "BlockPreconditioner",
    "schur_polynomial", "fgmres", "dense_block_solve",
    "NewtonConfig", "SchemeState", "first_step", "residual", "newton_solve",
    "run", "StepFailureError", "PRECOND_VARIANTS",
    "RunRecord", "ErrorReport", "norm_p", "norm_neg1", "discrete_energy",
    "modified_energy", "error_metrics", "convergence_order",
    "iteration_stats",
]
