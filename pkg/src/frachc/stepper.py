"""Stabilized BDF2 time integrator and its Newton-Krylov inner solver.

One step advances the stacked unknown psi = [phi; mu] through

    3 phi^{j+1} - 4 phi^j + phi^{j-1} = 2 tau G mu^{j+1} + 2 tau f^{j+1},
    mu^{j+1} = (phi^{j+1})^3 - 2 phi^j + phi^{j-1} - eps2 G phi^{j+1}
               - sigma tau G (phi^{j+1} - phi^j) + psi_src^{j+1},

where the concave term is extrapolated explicitly and the sigma term is
the Douglas-Dupont regularization that buys energy stability.  The first
step is an explicit Taylor start: mu^0 = (phi^0)^3 - phi^0 - eps2 G phi^0
(+ source), phi^1 = phi^0 + tau (G mu^0 + f^0).
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, Iterable, List, Optional, Tuple

import numpy as np

from . import diagnostics
from .diagnostics import RunRecord
from .frac_operator import FracOperator, build_operator
from .krylov import (DENSE_CAP_DEFAULT, BlockJacobian, BlockPreconditioner,
                     KrylovConfig, dense_block_solve, fgmres)
from .model import Discretization, ModelParams, Problem, interior_nodes
from .structured import strang_circulant, strang_skew_circulant

__all__ = [
    "PRECOND_VARIANTS",
    "StepFailureError",
    "NewtonConfig",
    "SchemeState",
    "first_step",
    "residual",
    "newton_solve",
    "run",
]

PRECOND_VARIANTS = ("none", "skew", "circ", "dense")


class StepFailureError(RuntimeError):
    """Newton or Krylov failure; carries the failing step index."""

    def __init__(self, message: str, step_index: Optional[int] = None):
        super().__init__(message)
        self.step_index = step_index


@dataclass(frozen=True)
class NewtonConfig:
    """Outer Newton loop: stop when ||update|| / ||initial guess|| falls
    below ``rel_tol``, fail after ``max_iters`` iterations."""

    max_iters: int = 200
    rel_tol: float = 1e-12

    def __post_init__(self) -> None:
        if self.max_iters < 1 or not self.rel_tol > 0:
            raise ValueError("NewtonConfig entries must be positive")


@dataclass
class SchemeState:
    """Two consecutive solution levels entering step j.

    ``phi_curr``/``mu_curr`` hold level j and ``phi_prev``/``mu_prev``
    level j-1; the mu history exists only to seed the extrapolated Newton
    guess.
    """

    phi_prev: np.ndarray
    phi_curr: np.ndarray
    mu_prev: np.ndarray
    mu_curr: np.ndarray
    step_index: int
    time: float


def first_step(phi0: np.ndarray, op: FracOperator, params: ModelParams,
               disc: Discretization,
               f0: Optional[np.ndarray] = None,
               psi0: Optional[np.ndarray] = None) -> Tuple[np.ndarray, np.ndarray]:
    """Explicit Taylor start producing (phi^1, mu^0).

    Sources, when present, are evaluated at t = 0 and enter exactly where
    the continuous equations place them.
    """
    phi0 = np.asarray(phi0, dtype=float)
    T = op.toeplitz
    mu0 = phi0 ** 3 - phi0 - params.epsilon2 * T.matvec(phi0)
    if psi0 is not None:
        mu0 = mu0 + psi0
    rate = T.matvec(mu0)
    if f0 is not None:
        rate = rate + f0
    return phi0 + disc.tau * rate, mu0


def residual(psi_next: np.ndarray, state: SchemeState, op: FracOperator,
             params: ModelParams, disc: Discretization,
             f_next: Optional[np.ndarray] = None,
             psi_src_next: Optional[np.ndarray] = None) -> np.ndarray:
    """Nonlinear residual F(psi^{j+1}) of one implicit step.

    The first block row carries the BDF2 recurrence scaled by 2 tau (so the
    source enters as 2 tau f^{j+1}); the second is the chemical-potential
    relation with the extrapolated concave part on the right.
    """
    n = op.size
    if psi_next.shape != (2 * n,):
        raise ValueError(f"expected stacked vector of length {2 * n}, "
                         f"got shape {psi_next.shape}")
    phi_n, mu_n = psi_next[:n], psi_next[n:]
    phi_j, phi_jm1 = state.phi_curr, state.phi_prev
    tau = disc.tau
    T = op.toeplitz

    r1 = 3.0 * phi_n - 2.0 * tau * T.matvec(mu_n) - (4.0 * phi_j - phi_jm1)
    if f_next is not None:
        r1 = r1 - 2.0 * tau * f_next
    r2 = ((params.epsilon2 + params.sigma * tau) * T.matvec(phi_n) + mu_n
          - (-2.0 * phi_j + phi_jm1 + params.sigma * tau * T.matvec(phi_j)
             + phi_n ** 3))
    if psi_src_next is not None:
        r2 = r2 - psi_src_next
    return np.concatenate([r1, r2])


def _initial_guess(state: SchemeState) -> np.ndarray:
    if state.step_index == 1:
        return np.concatenate([state.phi_prev, state.mu_prev])
    return np.concatenate([2.0 * state.phi_curr - state.phi_prev,
                           2.0 * state.mu_curr - state.mu_prev])


def newton_solve(state: SchemeState, op: FracOperator, params: ModelParams,
                 disc: Discretization,
                 ncfg: NewtonConfig = NewtonConfig(),
                 kcfg: KrylovConfig = KrylovConfig(),
                 precond_variant: str = "skew",
                 f_next: Optional[np.ndarray] = None,
                 psi_src_next: Optional[np.ndarray] = None,
                 surrogate=None,
                 dense_cap: int = DENSE_CAP_DEFAULT):
    """Newton iteration for one implicit step.

    Returns (psi^{j+1}, newton_iterations, krylov_iterations_per_newton).
    The inner systems go through FGMRES with the selected preconditioner,
    or through dense LU for the baseline variant.
    """
    if precond_variant not in PRECOND_VARIANTS:
        raise ValueError(f"unknown preconditioner variant {precond_variant!r}")
    n = op.size
    tau = disc.tau
    T = op.toeplitz
    if surrogate is None:
        if precond_variant == "skew":
            surrogate = strang_skew_circulant(op)
        elif precond_variant == "circ":
            surrogate = strang_circulant(op)

    psi = _initial_guess(state)
    denom = max(float(np.linalg.norm(psi)), float(np.finfo(float).tiny))
    krylov_counts: List[int] = []

    for ell in range(1, ncfg.max_iters + 1):
        F = residual(psi, state, op, params, disc, f_next, psi_src_next)
        J = BlockJacobian(T, tau, params.epsilon2, params.sigma, psi[:n] ** 2)
        if precond_variant == "dense":
            dpsi = dense_block_solve(J, F, dense_cap)
            krylov_counts.append(0)
        else:
            apply_M = None
            if precond_variant != "none":
                P = BlockPreconditioner(precond_variant, T, surrogate, tau,
                                        params.epsilon2, params.sigma, psi[:n])
                apply_M = P.apply
            result = fgmres(J.matvec, F, apply_M, kcfg)
            if not result.converged:
                raise StepFailureError(
                    f"FGMRES stalled at relative residual {result.rel_res:.3e} "
                    f"after {result.iters} iterations (step {state.step_index})",
                    step_index=state.step_index)
            dpsi = result.x
            krylov_counts.append(result.iters)
        psi = psi - dpsi
        if float(np.linalg.norm(dpsi)) / denom <= ncfg.rel_tol:
            return psi, ell, krylov_counts

    raise StepFailureError(
        f"Newton did not converge within {ncfg.max_iters} iterations "
        f"(step {state.step_index})", step_index=state.step_index)


def run(problem: Problem, params: ModelParams, disc: Discretization,
        ncfg: NewtonConfig = NewtonConfig(),
        kcfg: KrylovConfig = KrylovConfig(),
        precond_variant: str = "skew",
        observers: Iterable[Callable] = (),
        record_energy: bool = False,
        dense_cap: int = DENSE_CAP_DEFAULT) -> RunRecord:
    """March the scheme from t = 0 to t = T.

    Performs the explicit first step and M-1 Newton-solved implicit steps,
    invoking each observer as observer(step, time, phi, mu, newton_iters,
    krylov_iters) after every step.  Wall time accumulates over the
    nonlinear solves only.  Runs with identical configuration are
    bit-reproducible.
    """
    if precond_variant not in PRECOND_VARIANTS:
        raise ValueError(f"unknown preconditioner variant {precond_variant!r}")
    observers = tuple(observers)
    op = build_operator(params, disc)
    x = interior_nodes(params, disc)
    M, tau = disc.M, disc.tau
    T = op.toeplitz

    surrogate = None
    if precond_variant == "skew":
        surrogate = strang_skew_circulant(op)
    elif precond_variant == "circ":
        surrogate = strang_circulant(op)

    phi0 = np.asarray(problem.initial_condition(x), dtype=float)
    has_src = problem.has_sources
    src_f = problem.source_f
    src_psi = problem.source_psi

    times = np.empty(M + 1)
    sup = np.empty(M + 1)
    newton_iters = np.zeros(M, dtype=int)
    krylov_iters: List[List[int]] = [[] for _ in range(M)]
    energy = np.empty(M + 1) if record_energy else None
    mod_energy = np.empty(M) if record_energy else None

    times[0] = 0.0
    sup[0] = np.abs(phi0).max()
    if record_energy:
        energy[0] = diagnostics.discrete_energy(phi0, op, params, disc)

    f0 = src_f(x, 0.0) if has_src else None
    psi0 = src_psi(x, 0.0) if has_src else None
    phi1, mu0 = first_step(phi0, op, params, disc, f0, psi0)
    # mu at t_1 is not defined by the scheme; the chemical-potential
    # relation supplies a consistent value to seed the first extrapolated
    # Newton guess.
    mu1 = phi1 ** 3 - phi1 - params.epsilon2 * T.matvec(phi1)
    if has_src:
        mu1 = mu1 + src_psi(x, tau)

    times[1] = tau
    sup[1] = np.abs(phi1).max()
    if record_energy:
        energy[1] = diagnostics.discrete_energy(phi1, op, params, disc)
        mod_energy[0] = diagnostics.modified_energy(phi1, phi0, op, params, disc)
    for obs in observers:
        obs(0, tau, phi1, mu1, 0, [])

    state = SchemeState(phi_prev=phi0, phi_curr=phi1, mu_prev=mu0,
                        mu_curr=mu1, step_index=1, time=tau)
    solve_seconds = 0.0

    for j in range(1, M):
        t_next = (j + 1) * tau
        f_next = src_f(x, t_next) if has_src else None
        psi_src_next = src_psi(x, t_next) if has_src else None
        tic = time.perf_counter()
        psi_next, n_newton, counts = newton_solve(
            state, op, params, disc, ncfg, kcfg, precond_variant,
            f_next, psi_src_next, surrogate, dense_cap)
        solve_seconds += time.perf_counter() - tic

        n = op.size
        phi_next, mu_next = psi_next[:n], psi_next[n:]
        newton_iters[j] = n_newton
        krylov_iters[j] = counts
        times[j + 1] = t_next
        sup[j + 1] = np.abs(phi_next).max()
        if record_energy:
            energy[j + 1] = diagnostics.discrete_energy(phi_next, op, params, disc)
            mod_energy[j] = diagnostics.modified_energy(
                phi_next, state.phi_curr, op, params, disc)
        for obs in observers:
            obs(j, t_next, phi_next, mu_next, n_newton, counts)

        state = SchemeState(phi_prev=state.phi_curr, phi_curr=phi_next,
                            mu_prev=state.mu_curr, mu_curr=mu_next,
                            step_index=j + 1, time=t_next)

    return RunRecord(times=times, sup_norm=sup, newton_iters=newton_iters,
                     krylov_iters=krylov_iters, final_phi=state.phi_curr,
                     final_mu=state.mu_curr, solve_seconds=solve_seconds,
                     energy=energy, modified_energy=mod_energy)
