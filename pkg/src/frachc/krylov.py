"""Matrix-free linear algebra for the Newton systems.

Each Newton step solves a 2n x 2n block system

    [ 3 I                 -2 tau G ] [d_phi]   [r_phi]
    [ (eps2 + sigma tau) G - 3 D    I       ] [d_mu ] = [r_mu ],

with D = diag(phi^2) at the current Newton iterate.  The system is solved
by full (non-restarted) flexible GMRES with a block lower-triangular right
preconditioner whose Schur-complement slot is a fast-diagonalizable
surrogate: a Strang-type skew-circulant or a Strang circulant polynomial.
A dense LU path is kept as the quality/timing baseline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np
import scipy.linalg

from .structured import (Circulant, InternalConsistencyError,
                         SkewCirculant, SymmetricToeplitz)

__all__ = [
    "KrylovError",
    "KrylovConfig",
    "BlockJacobian",
    "schur_polynomial",
    "BlockPreconditioner",
    "FgmresResult",
    "fgmres",
    "dense_block_solve",
]

DENSE_CAP_DEFAULT = 2048


class KrylovError(RuntimeError):
    """Numerical failure inside an iterative solve (NaN/Inf in the basis)."""


@dataclass(frozen=True)
class KrylovConfig:
    """Stopping rule of the inner solver: relative residual below
    ``rel_tol`` or failure after ``max_iters`` iterations (no restarts)."""

    rel_tol: float = 1e-12
    max_iters: int = 1000

    def __post_init__(self) -> None:
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")


class BlockJacobian:
    """The 2n x 2n Newton matrix, applied block-wise with FFT matvecs."""

    def __init__(self, G: SymmetricToeplitz, tau: float, epsilon2: float,
                 sigma: float, diag_phi_sq: np.ndarray):
        self.G = G
        self.tau = tau
        self.epsilon2 = epsilon2
        self.sigma = sigma
        self.diag_phi_sq = np.asarray(diag_phi_sq, dtype=float)
        self.n = G.n
        if self.diag_phi_sq.shape != (self.n,):
            raise ValueError("diag_phi_sq must have length n")

    @property
    def shape(self):
        return (2 * self.n, 2 * self.n)

    def matvec(self, v: np.ndarray) -> np.ndarray:
        n = self.n
        if v.shape != (2 * n,):
            raise ValueError(f"expected vector of length {2 * n}, got shape {v.shape}")
        w1, w2 = v[:n], v[n:]
        top = 3.0 * w1 - 2.0 * self.tau * self.G.matvec(w2)
        bottom = ((self.epsilon2 + self.sigma * self.tau) * self.G.matvec(w1)
                  - 3.0 * self.diag_phi_sq * w1 + w2)
        return np.concatenate([top, bottom])

    def dense(self) -> np.ndarray:
        n = self.n
        Gd = self.G.dense()
        out = np.zeros((2 * n, 2 * n))
        out[:n, :n] = 3.0 * np.eye(n)
        out[:n, n:] = -2.0 * self.tau * Gd
        out[n:, :n] = (self.epsilon2 + self.sigma * self.tau) * Gd
        out[n:, :n][np.diag_indices(n)] -= 3.0 * self.diag_phi_sq
        out[n:, n:] = np.eye(n)
        return out


def schur_polynomial(tau: float, epsilon2: float, sigma: float,
                     phi_bar: float) -> Callable[[np.ndarray], np.ndarray]:
    """Scalar map lam -> 1 + (2/3) tau (eps2 + sigma tau) lam^2 - 2 tau phi_bar lam.

    Applying it to the surrogate spectrum yields the eigenvalues of the
    Schur-complement replacement; for real negative lam and phi_bar >= 0
    every mapped value exceeds 1.
    """
    c2 = (2.0 / 3.0) * tau * (epsilon2 + sigma * tau)
    c1 = 2.0 * tau * phi_bar

    def poly(lam):
        return 1.0 + c2 * lam * lam - c1 * lam

    return poly


class BlockPreconditioner:
    """Block lower-triangular preconditioner with a structured Schur slot.

    variant 'skew' uses the Strang-type skew-circulant surrogate, variant
    'circ' the Strang circulant one.  Application is an exact forward
    substitution: y1 = r1 / 3, then one structured polynomial solve for y2.
    The surrogate spectrum is precomputed at construction; with phi_bar >= 0
    it has real part > 1, so the solve cannot be singular.
    """

    def __init__(self, variant: str, G: SymmetricToeplitz,
                 surrogate, tau: float, epsilon2: float, sigma: float,
                 phi: np.ndarray):
        if variant not in ("skew", "circ"):
            raise ValueError(f"unknown preconditioner variant {variant!r}")
        expected = SkewCirculant if variant == "skew" else Circulant
        if not isinstance(surrogate, expected):
            raise TypeError(f"variant {variant!r} needs a {expected.__name__} surrogate")
        phi = np.asarray(phi, dtype=float)
        self.variant = variant
        self.G = G
        self.surrogate = surrogate
        self.tau = tau
        self.epsilon2 = epsilon2
        self.sigma = sigma
        self.diag_phi_sq = phi * phi
        self.phi_bar = float(np.mean(self.diag_phi_sq))
        raw = schur_polynomial(tau, epsilon2, sigma,
                               self.phi_bar)(surrogate.eigenvalues)
        # both Strang surrogates are symmetric, so the mapped spectrum is
        # real up to transform roundoff; verify, then project
        residue = float(np.abs(raw.imag).max())
        if residue > 1e-12 * float(np.abs(raw).max()):
            raise InternalConsistencyError(
                f"Schur surrogate spectrum not real: residue {residue:.3e}")
        self.schur_spectrum = np.ascontiguousarray(raw.real)
        self.n = G.n

    def apply(self, r: np.ndarray) -> np.ndarray:
        n = self.n
        if r.shape != (2 * n,):
            raise ValueError(f"expected vector of length {2 * n}, got shape {r.shape}")
        y1 = r[:n] / 3.0
        rhs = r[n:] - ((self.epsilon2 + self.sigma * self.tau) * self.G.matvec(y1)
                       - 3.0 * self.diag_phi_sq * y1)
        y2 = self.surrogate.solve_with_spectrum(self.schur_spectrum, rhs)
        return np.concatenate([y1, y2])

    def dense(self) -> np.ndarray:
        """Dense expansion of the preconditioner (oracle/testing use)."""
        n = self.n
        Gd = self.G.dense()
        Sd = self.surrogate.dense()
        out = np.zeros((2 * n, 2 * n))
        out[:n, :n] = 3.0 * np.eye(n)
        out[n:, :n] = (self.epsilon2 + self.sigma * self.tau) * Gd
        out[n:, :n][np.diag_indices(n)] -= 3.0 * self.diag_phi_sq
        out[n:, n:] = np.eye(n) + ((2.0 / 3.0) * self.tau
                                   * (self.epsilon2 + self.sigma * self.tau)) * (Sd @ Sd) \
            - 2.0 * self.tau * self.phi_bar * Sd
        return out


@dataclass
class FgmresResult:
    x: np.ndarray
    iters: int
    rel_res: float
    converged: bool
    residuals: List[float] = field(default_factory=list)


def fgmres(apply_A: Callable[[np.ndarray], np.ndarray], b: np.ndarray,
           apply_M: Optional[Callable[[np.ndarray], np.ndarray]] = None,
           cfg: KrylovConfig = KrylovConfig()) -> FgmresResult:
    """Right-preconditioned flexible GMRES with zero initial guess.

    Modified Gram-Schmidt orthogonalization with one reorthogonalization
    pass when severe cancellation is detected; no restarts.  The residual
    tracked through the Givens recurrence is the true unpreconditioned
    residual, and its sequence is non-increasing by construction (asserted).
    Happy breakdown counts as convergence.
    """
    b = np.asarray(b, dtype=float)
    if not np.all(np.isfinite(b)):
        raise KrylovError("right-hand side contains NaN/Inf")
    m = b.size
    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0:
        return FgmresResult(x=np.zeros(m), iters=0, rel_res=0.0,
                            converged=True, residuals=[])

    max_iters = min(cfg.max_iters, m)
    V = [b / bnorm]
    Z: List[np.ndarray] = []
    # Givens-reduced Hessenberg columns (upper-triangular R) and rhs g
    R: List[np.ndarray] = []
    cs: List[float] = []
    sn: List[float] = []
    g = [bnorm]
    residuals: List[float] = []
    res = bnorm
    converged = False
    k = 0

    for k in range(max_iters):
        z = apply_M(V[k]) if apply_M is not None else V[k]
        w = apply_A(z)
        Z.append(z)
        wnorm0 = float(np.linalg.norm(w))
        h = np.zeros(k + 2)
        for i in range(k + 1):
            h[i] = float(np.dot(V[i], w))
            w = w - h[i] * V[i]
        hlast = float(np.linalg.norm(w))
        if hlast < 1e-3 * wnorm0:
            # severe cancellation: one reorthogonalization pass
            for i in range(k + 1):
                corr = float(np.dot(V[i], w))
                h[i] += corr
                w = w - corr * V[i]
            hlast = float(np.linalg.norm(w))
        h[k + 1] = hlast
        if not np.all(np.isfinite(h)):
            raise KrylovError(f"non-finite Hessenberg entries at iteration {k + 1}")

        # previously accumulated Givens rotations
        for i in range(k):
            t = cs[i] * h[i] + sn[i] * h[i + 1]
            h[i + 1] = -sn[i] * h[i] + cs[i] * h[i + 1]
            h[i] = t
        # new rotation annihilating h[k+1]
        denom = math.hypot(h[k], h[k + 1])
        if denom == 0.0:
            c, s = 1.0, 0.0
        else:
            c, s = h[k] / denom, h[k + 1] / denom
        cs.append(c)
        sn.append(s)
        h[k] = denom
        h[k + 1] = 0.0
        R.append(h[:k + 1].copy())
        g.append(-s * g[k])
        g[k] = c * g[k]

        prev = res
        res = abs(g[k + 1])
        assert res <= prev * (1.0 + 1e-12), "GMRES residual increased"
        residuals.append(res)

        if res / bnorm <= cfg.rel_tol or hlast == 0.0:
            converged = True
            break
        V.append(w / hlast)

    iters = k + 1 if residuals else 0
    # back substitution on the triangular system R y = g
    y = np.zeros(iters)
    for i in range(iters - 1, -1, -1):
        acc = g[i] - sum(R[j][i] * y[j] for j in range(i + 1, iters))
        y[i] = acc / R[i][i]
    x = np.zeros(m)
    for j in range(iters):
        x += y[j] * Z[j]
    return FgmresResult(x=x, iters=iters, rel_res=res / bnorm,
                        converged=converged or res / bnorm <= cfg.rel_tol,
                        residuals=residuals)


def dense_block_solve(J: BlockJacobian, b: np.ndarray,
                      dense_cap: int = DENSE_CAP_DEFAULT) -> np.ndarray:
    """Direct LU solve of the assembled Newton system (baseline path)."""
    if J.n > dense_cap:
        raise ValueError(f"dense solve refused: n = {J.n} exceeds cap {dense_cap}")
    return scipy.linalg.solve(J.dense(), b)
