"""Shared oracles for the test suite.

Everything here is deliberately independent of the library's fast paths:
dense matrices are assembled index by index, and the closed-form fractional
Laplacian of the bump powers comes from the hypergeometric finite sum
rather than the expanded polynomials the sources use.
"""

import math

import numpy as np
import pytest


def dense_toeplitz(col):
    """Symmetric Toeplitz matrix from its first column, index by index."""
    col = np.asarray(col, dtype=float)
    n = col.size
    return np.array([[col[abs(i - j)] for j in range(n)] for i in range(n)])


def dense_circulant(col):
    col = np.asarray(col, dtype=float)
    n = col.size
    return np.array([[col[(i - j) % n] for j in range(n)] for i in range(n)])


def dense_skew_circulant(col):
    """Skew-circulant: wrap-around (upper-triangle) entries are negated."""
    col = np.asarray(col, dtype=float)
    n = col.size
    out = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            out[i, j] = col[i - j] if i >= j else -col[n + i - j]
    return out


def frac_lap_bump(s: int, alpha: float, x):
    """Closed form of the fractional Laplacian of (1-x^2)^(s + alpha/2).

    For integer s >= 0 and |x| < 1 the result is the degree-s polynomial in
    x^2 given by the terminating Gauss hypergeometric series
    2F1((alpha+1)/2, -s; 1/2; x^2) times a Gamma-function prefactor.
    """
    x = np.asarray(x, dtype=float)
    a = (alpha + 1.0) / 2.0
    pref = (2.0 ** alpha * math.gamma(a) * math.gamma(s + 1 + alpha / 2.0)
            / (math.sqrt(math.pi) * math.gamma(s + 1.0)))
    acc = np.zeros_like(x)
    term = np.ones_like(x)
    for k in range(s + 1):
        if k > 0:
            term = term * ((a + k - 1) * (-s + k - 1) / ((0.5 + k - 1) * k)) * x * x
        acc = acc + term
    return pref * acc


@pytest.fixture
def rng():
    return np.random.default_rng(20240913)
