"""Build the discrete fractional Laplacian and inspect its structure.

The operator on the interior nodes is a symmetric Toeplitz matrix G with
entries -c_h * g_{|i-j|}: a positive diagonal weight g_0 and negative,
algebraically decaying off-diagonal weights.  -G is symmetric positive
definite, certified here by a Gershgorin argument and a Cholesky
factorization, and G applied to a smooth compactly supported profile
converges to the closed-form fractional Laplacian.
"""

import math

import numpy as np

from frachc import (Discretization, ModelParams, build_operator,
                    frac_weights, gershgorin_check, scale_constant)

alpha = 1.5
params = ModelParams(alpha=alpha, epsilon2=0.1, sigma=1 / 16, L=1.0, T=1.0)

print(f"weights for alpha = {alpha}:")
w = frac_weights(alpha, N=16)
print("  g_0   =", w.g[0])
print("  g_1.. =", w.g[1:6], "...")
print("  sum of |g_k|, k >= 1 :", np.abs(w.g[1:]).sum(), "< g_0")

print("\nmesh scale c_h = c_1 / (nu h^alpha):")
for N in (16, 32, 64):
    h = 2.0 * params.L / N
    print(f"  N={N:4d}  h={h:.4f}  c_h={scale_constant(alpha, h):.6e}")

print("\nGershgorin certificate for -G:")
for N in (16, 256, 1024):
    disc = Discretization.build(params, N=N, M=2)
    rep = gershgorin_check(build_operator(params, disc))
    print(f"  N={N:5d}  center={rep.center:.4e}  radius={rep.max_radius:.4e}"
          f"  definite={rep.is_definite}")

disc = Discretization.build(params, N=32, M=2)
op = build_operator(params, disc)
np.linalg.cholesky(-op.dense())
print("\nCholesky of -G (N=32): success, so -G is SPD as certified.")

# closed form: the fractional Laplacian of (1-x^2)^(3+alpha/2) is a cubic
# polynomial in x^2 times a Gamma prefactor
print("\noperator consistency against the closed form:")
a = (alpha + 1.0) / 2.0
pref = (2.0 ** alpha * math.gamma(a) * math.gamma(4 + alpha / 2)
        / (math.sqrt(math.pi) * math.gamma(4.0)))
for N in (64, 128, 256, 512):
    disc = Discretization.build(params, N=N, M=2)
    op = build_operator(params, disc)
    x = -1.0 + np.arange(1, N) * disc.h
    x2 = x * x
    phi = (1.0 - x2) ** (3.0 + alpha / 2.0)
    exact = pref * (1.0 - 3.0 * (alpha + 1.0) * x2
                    + (alpha + 1.0) * (alpha + 3.0) * x2 ** 2
                    - (alpha + 1.0) * (alpha + 3.0) * (alpha + 5.0) / 15.0 * x2 ** 3)
    err = np.abs(-op.matvec(phi) - exact).max()
    print(f"  N={N:4d}  max |(-G phi) - closed form| = {err:.3e}")
