"""Discrete norms, energies, error metrics and iteration statistics.

Grid functions live on the interior nodes with implicit zero boundary
values, so the h-weighted sums over interior entries equal the full-mesh
sums.  The dual (-1)-norm requires one solve with the positive definite
matrix -G, done by conjugate gradients with FFT matvecs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
import scipy.sparse.linalg

from .frac_operator import FracOperator
from .model import Discretization, ModelParams, Problem, interior_nodes

__all__ = [
    "DiagnosticsError",
    "RunRecord",
    "ErrorReport",
    "norm_p",
    "norm_neg1",
    "discrete_energy",
    "modified_energy",
    "error_metrics",
    "convergence_order",
    "iteration_stats",
]


class DiagnosticsError(RuntimeError):
    """A diagnostic computation failed (e.g. CG did not converge)."""


@dataclass
class RunRecord:
    """Everything a time-marching run reports.

    ``times`` has M+1 entries t_0..t_M and ``sup_norm`` the matching
    max-norms of phi.  ``newton_iters[j]`` and ``krylov_iters[j]`` describe
    step j (the explicit first step j=0 contributes 0 and []).  Energies
    are filled only when requested: ``energy[k]`` is E_h(phi^k)
    (M+1 entries) and ``modified_energy[k]`` pairs levels k+1 and k
    (M entries).  ``solve_seconds`` covers the nonlinear solves only.
    """

    times: np.ndarray
    sup_norm: np.ndarray
    newton_iters: np.ndarray
    krylov_iters: List[List[int]]
    final_phi: np.ndarray
    final_mu: np.ndarray
    solve_seconds: float
    energy: Optional[np.ndarray] = None
    modified_energy: Optional[np.ndarray] = None

    @property
    def M(self) -> int:
        return len(self.newton_iters)


@dataclass(frozen=True)
class ErrorReport:
    """Final-time errors against an exact solution."""

    err_inf: float
    err_2: float


def norm_p(u: np.ndarray, p, h: float) -> float:
    """Discrete p-norm ||u||_p = (h sum |u_k|^p)^(1/p), or the max norm."""
    u = np.asarray(u, dtype=float)
    if p == math.inf or p == "inf":
        return float(np.abs(u).max()) if u.size else 0.0
    if p == 2:
        return math.sqrt(h) * float(np.linalg.norm(u))
    if p == 4:
        return float((h * np.sum(u ** 4)) ** 0.25)
    raise ValueError(f"unsupported norm order {p!r}")


def norm_neg1(u: np.ndarray, op: FracOperator, h: float) -> float:
    """Dual norm sqrt(h u^T (-G)^{-1} u) induced by the inverse operator.

    The inner solve runs unpreconditioned CG on the SPD matrix -G to a
    relative residual of 1e-12; this is a diagnostic, not a hot path.
    """
    u = np.asarray(u, dtype=float)
    n = u.size
    if not np.any(u):
        return 0.0
    T = op.toeplitz
    A = scipy.sparse.linalg.LinearOperator(
        shape=(n, n), matvec=lambda v: -T.matvec(v), dtype=float)
    w, info = scipy.sparse.linalg.cg(A, u, rtol=1e-12, atol=0.0, maxiter=10 * n)
    if info != 0:
        raise DiagnosticsError(f"CG on -G failed to converge (info={info})")
    quad = float(np.dot(u, w))
    # the quadratic form is positive; tiny negative values are CG roundoff
    return math.sqrt(h * max(quad, 0.0))


def discrete_energy(phi: np.ndarray, op: FracOperator, params: ModelParams,
                    disc: Discretization) -> float:
    """Mesh energy: double-well terms, the constant |Omega|/4, and the
    fractional quadratic form (eps2/2) h phi^T (-G) phi."""
    phi = np.asarray(phi, dtype=float)
    h = disc.h
    quad = float(np.dot(phi, -op.toeplitz.matvec(phi)))
    return (0.25 * h * float(np.sum(phi ** 4))
            - 0.5 * h * float(np.sum(phi ** 2))
            + 0.5 * params.L
            + 0.5 * params.epsilon2 * h * quad)


def modified_energy(phi_next: np.ndarray, phi_curr: np.ndarray,
                    op: FracOperator, params: ModelParams,
                    disc: Discretization) -> float:
    """Energy augmented with dual-norm and L2 difference penalties; this is
    the quantity that decays monotonically for sigma >= 1/16."""
    diff = np.asarray(phi_next, dtype=float) - np.asarray(phi_curr, dtype=float)
    e = discrete_energy(phi_next, op, params, disc)
    return (e + norm_neg1(diff, op, disc.h) ** 2 / (4.0 * disc.tau)
            + 0.5 * norm_p(diff, 2, disc.h) ** 2)


def error_metrics(final_phi: np.ndarray, problem: Problem,
                  params: ModelParams, disc: Discretization) -> ErrorReport:
    """Final-time errors of phi against the problem's exact solution.

    Boundary nodes are identically zero for both solutions and cannot
    contribute, so the interior comparison is exact.
    """
    if not problem.has_exact:
        raise ValueError(f"problem {problem.kind.value} has no exact solution")
    x = interior_nodes(params, disc)
    e = problem.exact_phi(x, params.T) - np.asarray(final_phi, dtype=float)
    return ErrorReport(err_inf=float(np.abs(e).max()),
                       err_2=norm_p(e, 2, disc.h))


def convergence_order(err_coarse: float, err_fine: float,
                      step_coarse: float, step_fine: float) -> float:
    """Observed order log(err_c/err_f) / log(step_c/step_f)."""
    if step_coarse == step_fine:
        raise ValueError("refinement ratio must differ from 1")
    return math.log(err_coarse / err_fine) / math.log(step_coarse / step_fine)


def iteration_stats(record_or_newton, krylov: Optional[Sequence[Sequence[int]]] = None):
    """Average Newton iterations per step and Krylov iterations per Newton
    solve.

    Both averages divide by the total number of steps M, including the
    explicit first step, which contributes zero counts.
    """
    if isinstance(record_or_newton, RunRecord):
        newton = record_or_newton.newton_iters
        krylov = record_or_newton.krylov_iters
    else:
        newton = record_or_newton
        assert krylov is not None
    M = len(newton)
    if M == 0:
        return 0.0, 0.0
    iter1 = float(np.sum(newton)) / M
    inner = 0.0
    for n_j, counts in zip(newton, krylov):
        if n_j > 0:
            inner += float(np.sum(counts)) / n_j
    return iter1, inner / M
