"""Discrete fractional Laplacian on the interior nodes.

The operator matrix G is the (N-1) x (N-1) symmetric Toeplitz matrix with
entries G[i, j] = -c_h * g_{|i-j|}, where the weights g_k come from the
weighted-trapezoidal quadrature of the singular integral with splitting
exponent gamma = 1 + alpha/2.  G represents -(-Lap)^(alpha/2); the negated
matrix -G is symmetric positive definite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .structured import SymmetricToeplitz

__all__ = [
    "FracWeights",
    "FracOperator",
    "GershgorinReport",
    "frac_weights",
    "scale_constant",
    "build_operator",
    "gershgorin_check",
]


@dataclass(frozen=True)
class FracWeights:
    """Quadrature weights g_0, ..., g_{N-2} for one (alpha, N) pair.

    g_0 > 0 carries the truncated series plus boundary and tail
    corrections and therefore depends on N; g_k < 0 for k >= 1.  Symmetry
    g_{-k} = g_k is implicit.
    """

    alpha: float
    N: int
    g: np.ndarray


def frac_weights(alpha: float, N: int) -> FracWeights:
    """Weights of the weighted-trapezoidal fractional-Laplacian stencil.

    g_0 = sum_{l=1}^{N-1} ((l+1)^nu - (l-1)^nu) / l^gamma
          + (N^nu - (N-1)^nu) / N^gamma + 2 nu / (alpha N^alpha),
    g_k = -((k+1)^nu - (k-1)^nu) / (2 k^gamma)   for k = 1..N-2,

    with gamma = 1 + alpha/2 and nu = 1 - alpha/2.  The g_0 series is
    accumulated smallest-terms-first with exact (compensated) summation.
    """
    if not 1.0 < alpha < 2.0:
        raise ValueError(f"alpha must lie in (1, 2), got {alpha}")
    if N < 4:
        raise ValueError(f"N must be at least 4, got {N}")
    nu = 1.0 - alpha / 2.0
    gam = 1.0 + alpha / 2.0

    ell = np.arange(1, N, dtype=float)
    series = ((ell + 1.0) ** nu - (ell - 1.0) ** nu) / ell ** gam
    g0 = math.fsum(series[::-1])
    g0 += (N ** nu - (N - 1) ** nu) / N ** gam
    g0 += 2.0 * nu / (alpha * N ** alpha)

    k = np.arange(1, N - 1, dtype=float)
    g = np.empty(N - 1)
    g[0] = g0
    g[1:] = -((k + 1.0) ** nu - (k - 1.0) ** nu) / (2.0 * k ** gam)
    g.flags.writeable = False
    return FracWeights(alpha=alpha, N=N, g=g)


def scale_constant(alpha: float, h: float) -> float:
    """Mesh scale c_h = c_1 / (nu h^alpha) of the discrete operator.

    c_1 = 2^(alpha-1) alpha Gamma((alpha+1)/2) / (sqrt(pi) Gamma(1-alpha/2))
    is the constant of the singular-integral definition of the fractional
    Laplacian.
    """
    if not h > 0:
        raise ValueError(f"h must be positive, got {h}")
    nu = 1.0 - alpha / 2.0
    c1 = (2.0 ** (alpha - 1.0) * alpha * math.gamma((alpha + 1.0) / 2.0)
          / (math.sqrt(math.pi) * math.gamma(1.0 - alpha / 2.0)))
    return c1 / (nu * h ** alpha)


@dataclass(frozen=True)
class FracOperator:
    """The matrix G stored as scale and first column.

    ``first_column[k] = -scale * g_k`` is the first column of G; the full
    matrix has G[i, j] = first_column[|i - j|].  The diagonal of G is
    negative and -G is symmetric positive definite.
    """

    scale: float
    weights: FracWeights
    first_column: np.ndarray
    size: int
    _toeplitz: SymmetricToeplitz = field(repr=False, compare=False, default=None)

    @property
    def toeplitz(self) -> SymmetricToeplitz:
        """FFT-backed matvec form of G (built once, cached)."""
        if self._toeplitz is None:
            object.__setattr__(self, "_toeplitz", SymmetricToeplitz(self.first_column))
        return self._toeplitz

    def matvec(self, v: np.ndarray) -> np.ndarray:
        """G @ v in O(N log N)."""
        return self.toeplitz.matvec(v)

    def dense(self) -> np.ndarray:
        """Dense expansion of G (test/export use only)."""
        return self.toeplitz.dense()


def build_operator(params, disc) -> FracOperator:
    """Assemble G for the given parameters and mesh.

    g_0 depends on N, so the operator is rebuilt per resolution and never
    reused across meshes.
    """
    w = frac_weights(params.alpha, disc.N)
    c_h = scale_constant(params.alpha, disc.h)
    col = -c_h * w.g
    col.flags.writeable = False
    return FracOperator(scale=c_h, weights=w, first_column=col, size=disc.N - 1)


class GershgorinReport(NamedTuple):
    center: float
    max_radius: float
    is_definite: bool


def gershgorin_check(op: FracOperator) -> GershgorinReport:
    """Gershgorin certificate of positive definiteness for -G.

    Every disc of -G is centered at c_h * g_0 > 0; the radii are bounded by
    the full off-diagonal sum c_h * sum_{k>=1} |g_k|, which is strictly
    below the center.
    """
    g = op.weights.g
    center = op.scale * g[0]
    max_radius = op.scale * float(np.abs(g[1:]).sum())
    return GershgorinReport(center=center, max_radius=max_radius,
                            is_definite=max_radius < center)
