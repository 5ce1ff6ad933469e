"""Physical parameters, meshes and benchmark problems.

The model is the 1-D fractional Cahn-Hilliard system on Omega = (-L, L),

    d/dt phi = -(-Lap)^(alpha/2) mu + f,
    mu       = phi^3 - phi + eps2 * (-Lap)^(alpha/2) phi + psi,

with the *exterior* Dirichlet condition phi = mu = 0 on all of R \\ Omega
and 1 < alpha < 2.  Three benchmark problems are provided:

* ``example1`` - manufactured solution phi = e^t (1-x^2)^(3+alpha/2) with
  matching sources, used for convergence studies (L = 1).
* ``example2`` - physical run phi0 = 0.1 sin(x) on (-pi, pi) with no
  sources, used for energy-decay and preconditioner benchmarks.
* ``example_a`` - lower-regularity manufactured solution
  phi = mu = e^t (1-x^2)^(1+alpha/2) (L = 1).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

__all__ = [
    "SIGMA_STABLE_MIN",
    "ModelParams",
    "Discretization",
    "ProblemKind",
    "Problem",
    "gamma_fn",
    "example1_exact",
    "example1_sources",
    "example_a_exact",
    "example_a_sources",
    "example2_initial",
    "make_problem",
    "default_params",
    "interior_nodes",
]

# Douglas-Dupont stabilization threshold: sigma below this voids the
# energy-decay guarantee.
SIGMA_STABLE_MIN = 1.0 / 16.0


def gamma_fn(x: float) -> float:
    """Gamma function on the positive half axis.

    Raises
    ------
    ValueError
        If ``x <= 0`` (poles and the reflection region are not needed by
        any of the source-term prefactors, which stay in (0, 20]).
    """
    if not x > 0:
        raise ValueError(f"gamma_fn requires a positive argument, got {x}")
    return math.gamma(x)


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters of the fractional Cahn-Hilliard model.

    Attributes
    ----------
    alpha : float
        Fractional order, 1 < alpha < 2.
    epsilon2 : float
        Interface parameter eps^2 > 0.
    sigma : float
        Douglas-Dupont stabilization coefficient.  Energy decay is
        guaranteed only for sigma >= 1/16; smaller values require
        ``allow_small_sigma=True``.
    L : float
        Half-width of the domain Omega = (-L, L).
    T : float
        Final time.
    """

    alpha: float
    epsilon2: float
    sigma: float
    L: float
    T: float
    allow_small_sigma: bool = False

    def __post_init__(self) -> None:
        if not 1.0 < self.alpha < 2.0:
            raise ValueError(f"alpha must lie in (1, 2), got {self.alpha}")
        if not self.epsilon2 > 0:
            raise ValueError(f"epsilon2 must be positive, got {self.epsilon2}")
        if not self.L > 0:
            raise ValueError(f"L must be positive, got {self.L}")
        if not self.T > 0:
            raise ValueError(f"T must be positive, got {self.T}")
        if self.sigma < 0:
            raise ValueError(f"sigma must be non-negative, got {self.sigma}")
        if self.sigma < SIGMA_STABLE_MIN and not self.allow_small_sigma:
            raise ValueError(
                f"sigma = {self.sigma} < 1/16 voids the energy-stability "
                "guarantee; pass allow_small_sigma=True to override"
            )


@dataclass(frozen=True)
class Discretization:
    """Uniform space-time mesh.

    Nodes are x_i = -L + i*h for i = 0..N with h = 2L/N; the unknowns live
    at the interior nodes i = 1..N-1.  Time levels are t_j = j*tau with
    tau = T/M.  The splitting exponent of the weighted-trapezoidal
    discretization is fixed to gamma = 1 + alpha/2, hence nu = 1 - alpha/2.
    """

    N: int
    M: int
    h: float
    tau: float
    gamma: float
    nu: float

    @classmethod
    def build(cls, params: ModelParams, N: int, M: int) -> "Discretization":
        if N < 4:
            raise ValueError(f"N must be at least 4, got {N}")
        if M < 2:
            raise ValueError(f"M must be at least 2, got {M}")
        gamma = 1.0 + params.alpha / 2.0
        nu = 1.0 - params.alpha / 2.0
        return cls(N=N, M=M, h=2.0 * params.L / N, tau=params.T / M,
                   gamma=gamma, nu=nu)

    @property
    def n_interior(self) -> int:
        return self.N - 1


def interior_nodes(params: ModelParams, disc: Discretization) -> np.ndarray:
    """Interior mesh nodes x_1, ..., x_{N-1}."""
    i = np.arange(1, disc.N)
    return -params.L + i * disc.h


class ProblemKind(enum.Enum):
    EXAMPLE1 = "example1"
    EXAMPLE2 = "example2"
    EXAMPLE_A = "example_a"


@dataclass(frozen=True)
class Problem:
    """A concrete model problem: initial data plus optional exact solution
    and manufactured sources.

    ``exact_phi``/``exact_mu``/``source_f``/``source_psi`` take (x, t) with
    vectorized x; they are None for problems without a manufactured
    solution (example2).
    """

    kind: ProblemKind
    initial_condition: Callable[[np.ndarray], np.ndarray]
    exact_phi: Optional[Callable[[np.ndarray, float], np.ndarray]] = None
    exact_mu: Optional[Callable[[np.ndarray, float], np.ndarray]] = None
    source_f: Optional[Callable[[np.ndarray, float], np.ndarray]] = None
    source_psi: Optional[Callable[[np.ndarray, float], np.ndarray]] = None

    @property
    def has_exact(self) -> bool:
        return self.exact_phi is not None

    @property
    def has_sources(self) -> bool:
        return self.source_f is not None


def _bump_power(x: np.ndarray, p: float) -> np.ndarray:
    """(1 - x^2)^p inside (-1, 1), identically zero outside.

    Rounding can push 1 - x^2 slightly negative near the end points; the
    clamp keeps fractional powers real.
    """
    x = np.asarray(x, dtype=float)
    core = np.maximum(1.0 - x * x, 0.0)
    return np.where(np.abs(x) < 1.0, core ** p, 0.0)


def example1_exact(x, t: float, alpha: float):
    """Manufactured pair (phi, mu) of the smooth benchmark.

    phi = e^t (1-x^2)^(3+alpha/2),  mu = e^t (1-x^2)^(2+alpha/2) on (-1, 1),
    both extended by zero outside.
    """
    et = math.exp(t)
    return et * _bump_power(x, 3.0 + alpha / 2.0), et * _bump_power(x, 2.0 + alpha / 2.0)


def example1_sources(x, t: float, alpha: float, epsilon2: float):
    """Source pair (f, psi) matching :func:`example1_exact`.

    The fractional Laplacian of (1-x^2)^(s+alpha/2) is polynomial inside the
    domain; the prefactors carry the Gamma-function constants of that closed
    form.  Only valid for |x| < 1.
    """
    x = np.asarray(x, dtype=float)
    a = alpha
    x2 = x * x
    et = math.exp(t)
    root_pi = math.sqrt(math.pi)
    pre2 = 2.0 ** a * gamma_fn((a + 1.0) / 2.0) * gamma_fn(3.0 + a / 2.0) / (root_pi * gamma_fn(3.0))
    pre3 = 2.0 ** a * gamma_fn((a + 1.0) / 2.0) * gamma_fn(4.0 + a / 2.0) / (root_pi * gamma_fn(4.0))
    poly2 = 1.0 - 2.0 * (a + 1.0) * x2 + (a + 1.0) * (a + 3.0) / 3.0 * x2 ** 2
    poly3 = (1.0 - 3.0 * (a + 1.0) * x2 + (a + 1.0) * (a + 3.0) * x2 ** 2
             - (a + 1.0) * (a + 3.0) * (a + 5.0) / 15.0 * x2 ** 3)
    bump = np.maximum(1.0 - x2, 0.0)
    f = et * (bump ** (3.0 + a / 2.0) + pre2 * poly2)
    psi = (et * (bump ** (2.0 + a / 2.0) - epsilon2 * pre3 * poly3)
           - math.exp(3.0 * t) * bump ** (9.0 + 1.5 * a)
           + et * bump ** (3.0 + a / 2.0))
    return f, psi


def example_a_exact(x, t: float, alpha: float):
    """Lower-regularity manufactured pair phi = mu = e^t (1-x^2)^(1+alpha/2)."""
    v = math.exp(t) * _bump_power(x, 1.0 + alpha / 2.0)
    return v, v.copy() if isinstance(v, np.ndarray) else v


def example_a_sources(x, t: float, alpha: float, epsilon2: float):
    """Source pair (f, psi) matching :func:`example_a_exact` (|x| < 1)."""
    x = np.asarray(x, dtype=float)
    a = alpha
    x2 = x * x
    et = math.exp(t)
    pre1 = (2.0 ** a * gamma_fn((a + 1.0) / 2.0) * gamma_fn(2.0 + a / 2.0)
            / (math.sqrt(math.pi) * gamma_fn(2.0)))
    poly1 = 1.0 - (a + 1.0) * x2
    bump = np.maximum(1.0 - x2, 0.0)
    f = et * (bump ** (1.0 + a / 2.0) + pre1 * poly1)
    psi = (et * (bump ** (1.0 + a / 2.0) - epsilon2 * pre1 * poly1)
           - math.exp(3.0 * t) * bump ** (3.0 + 1.5 * a)
           + et * bump ** (1.0 + a / 2.0))
    return f, psi


def example2_initial(x) -> np.ndarray:
    """phi0(x) = 0.1 sin(x) on (-pi, pi)."""
    return 0.1 * np.sin(np.asarray(x, dtype=float))


# Canonical parameter choices for each benchmark.  T may be overridden
# (energy/benchmark runs of example2 use long horizons).
_DEFAULTS = {
    ProblemKind.EXAMPLE1: dict(epsilon2=0.1, L=1.0, T=1.0),
    ProblemKind.EXAMPLE_A: dict(epsilon2=0.1, L=1.0, T=1.0),
    ProblemKind.EXAMPLE2: dict(epsilon2=0.05, L=math.pi, T=46.0),
}


def default_params(kind: ProblemKind, alpha: float,
                   sigma: float = SIGMA_STABLE_MIN,
                   epsilon2: Optional[float] = None,
                   T: Optional[float] = None,
                   allow_small_sigma: bool = False) -> ModelParams:
    """Canonical :class:`ModelParams` for a benchmark problem."""
    base = _DEFAULTS[kind]
    return ModelParams(
        alpha=alpha,
        epsilon2=base["epsilon2"] if epsilon2 is None else epsilon2,
        sigma=sigma,
        L=base["L"],
        T=base["T"] if T is None else T,
        allow_small_sigma=allow_small_sigma,
    )


def make_problem(kind: ProblemKind, params: ModelParams) -> Problem:
    """Bind a benchmark problem to concrete parameters.

    The manufactured problems hard-code L = 1 in their closed forms and
    example2 lives on (-pi, pi); mismatched domains are rejected.
    """
    a = params.alpha
    e2 = params.epsilon2
    if kind in (ProblemKind.EXAMPLE1, ProblemKind.EXAMPLE_A):
        if not math.isclose(params.L, 1.0):
            raise ValueError(f"{kind.value} requires L = 1, got L = {params.L}")
    if kind is ProblemKind.EXAMPLE1:
        return Problem(
            kind=kind,
            initial_condition=lambda x: example1_exact(x, 0.0, a)[0],
            exact_phi=lambda x, t: example1_exact(x, t, a)[0],
            exact_mu=lambda x, t: example1_exact(x, t, a)[1],
            source_f=lambda x, t: example1_sources(x, t, a, e2)[0],
            source_psi=lambda x, t: example1_sources(x, t, a, e2)[1],
        )
    if kind is ProblemKind.EXAMPLE_A:
        return Problem(
            kind=kind,
            initial_condition=lambda x: example_a_exact(x, 0.0, a)[0],
            exact_phi=lambda x, t: example_a_exact(x, t, a)[0],
            exact_mu=lambda x, t: example_a_exact(x, t, a)[1],
            source_f=lambda x, t: example_a_sources(x, t, a, e2)[0],
            source_psi=lambda x, t: example_a_sources(x, t, a, e2)[1],
        )
    if kind is ProblemKind.EXAMPLE2:
        if not math.isclose(params.L, math.pi):
            raise ValueError(f"example2 requires L = pi, got L = {params.L}")
        return Problem(kind=kind, initial_condition=example2_initial)
    raise ValueError(f"unknown problem kind {kind!r}")
