"""Command-line front end: study drivers around the solver library.

Verbs: simulate | order-time | order-space | sigma-sweep | precond-bench |
export-operator.  Configuration comes from an optional TOML file plus flag
overrides (flags win).  All numeric artifacts are CSVs with 17-significant-
digit scientific notation; optional SVG plots are derived from the same
data.  Identical configurations produce byte-identical CSVs, except for the
measured-seconds column of the benchmark table; wall-clock timestamps go to
the sidecar log only.  The environment variable FRACHC_THREADS caps the
worker pool used for independent ladder entries.
"""

from __future__ import annotations

import argparse
import datetime
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import diagnostics, output, stepper
from .diagnostics import convergence_order, error_metrics, iteration_stats
from .frac_operator import build_operator
from .krylov import DENSE_CAP_DEFAULT, BlockJacobian, KrylovConfig
from .model import (Discretization, ModelParams, ProblemKind, default_params,
                    interior_nodes, make_problem)
from .stepper import PRECOND_VARIANTS, NewtonConfig, first_step
from .structured import strang_circulant, strang_skew_circulant

__all__ = ["RunConfig", "main", "build_parser"]

_KINDS = {
    "example1": ProblemKind.EXAMPLE1,
    "example2": ProblemKind.EXAMPLE2,
    "example_a": ProblemKind.EXAMPLE_A,
    "examplea": ProblemKind.EXAMPLE_A,
}


class ConfigError(ValueError):
    """Invalid run configuration (maps to exit status 2)."""


@dataclass
class RunConfig:
    """Fully resolved configuration of one CLI invocation."""

    problem: ProblemKind = ProblemKind.EXAMPLE2
    alpha: float = 1.5
    epsilon2: Optional[float] = None
    sigma_list: List[float] = field(default_factory=lambda: [1.0 / 16.0])
    L: Optional[float] = None
    T: Optional[float] = None
    N_list: Optional[List[int]] = None
    M_list: Optional[List[int]] = None
    precond_list: List[str] = field(default_factory=lambda: ["skew"])
    newton_tol: float = 1e-12
    newton_max_iters: int = 200
    krylov_tol: float = 1e-12
    krylov_max_iters: int = 1000
    dense_cap: int = DENSE_CAP_DEFAULT
    out: Path = Path("frachc-out")
    plots: bool = False
    allow_small_sigma: bool = False

    @property
    def sigma(self) -> float:
        return self.sigma_list[0]

    def n_list(self, default: Sequence[int]) -> List[int]:
        return list(self.N_list) if self.N_list is not None else list(default)

    def m_list(self, default: Sequence[int]) -> List[int]:
        return list(self.M_list) if self.M_list is not None else list(default)

    @property
    def precond(self) -> str:
        return self.precond_list[0]

    def params(self, sigma: Optional[float] = None) -> ModelParams:
        try:
            p = default_params(self.problem, self.alpha,
                               sigma=self.sigma if sigma is None else sigma,
                               epsilon2=self.epsilon2, T=self.T,
                               allow_small_sigma=self.allow_small_sigma)
            if self.L is not None and not math.isclose(self.L, p.L):
                p = ModelParams(alpha=p.alpha, epsilon2=p.epsilon2, sigma=p.sigma,
                                L=self.L, T=p.T,
                                allow_small_sigma=self.allow_small_sigma)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        return p

    def validate(self) -> None:
        for v in self.precond_list:
            if v not in PRECOND_VARIANTS:
                raise ConfigError(f"field precond: unknown variant {v!r}")
        for N in self.N_list or ():
            if N < 4:
                raise ConfigError(f"field N: must be at least 4, got {N}")
        for M in self.M_list or ():
            if M < 2:
                raise ConfigError(f"field M: must be at least 2, got {M}")
        if self.newton_tol <= 0 or self.krylov_tol <= 0:
            raise ConfigError("field tol: tolerances must be positive")
        if self.newton_max_iters < 1 or self.krylov_max_iters < 1:
            raise ConfigError("field max_iters: caps must be at least 1")
        for s in self.sigma_list:
            try:
                make_problem(self.problem, self.params(sigma=s))
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc

    def newton_config(self) -> NewtonConfig:
        return NewtonConfig(max_iters=self.newton_max_iters, rel_tol=self.newton_tol)

    def krylov_config(self) -> KrylovConfig:
        return KrylovConfig(rel_tol=self.krylov_tol, max_iters=self.krylov_max_iters)


def _parse_int_list(text: str) -> List[int]:
    try:
        return [int(tok) for tok in text.split(",") if tok]
    except ValueError as exc:
        raise ConfigError(f"cannot parse integer list {text!r}") from exc


def _parse_float_list(text: str) -> List[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok]
    except ValueError as exc:
        raise ConfigError(f"cannot parse float list {text!r}") from exc


def load_config(args: argparse.Namespace) -> RunConfig:
    """Resolve TOML file plus flag overrides into a validated RunConfig."""
    cfg = RunConfig()
    if args.config is not None:
        with open(args.config, "rb") as fh:
            data = tomllib.load(fh)
        for key, value in data.items():
            key = key.replace("-", "_")
            if key == "problem":
                if str(value).lower() not in _KINDS:
                    raise ConfigError(f"field problem: unknown kind {value!r}")
                cfg.problem = _KINDS[str(value).lower()]
            elif key == "sigma":
                cfg.sigma_list = [float(v) for v in value] if isinstance(value, list) else [float(value)]
            elif key == "N":
                cfg.N_list = [int(v) for v in value] if isinstance(value, list) else [int(value)]
            elif key == "M":
                cfg.M_list = [int(v) for v in value] if isinstance(value, list) else [int(value)]
            elif key == "precond":
                cfg.precond_list = list(value) if isinstance(value, list) else [str(value)]
            elif key == "out":
                cfg.out = Path(value)
            elif key in ("alpha", "epsilon2", "L", "T", "newton_tol", "krylov_tol"):
                setattr(cfg, key, float(value))
            elif key in ("newton_max_iters", "krylov_max_iters", "dense_cap"):
                setattr(cfg, key, int(value))
            elif key in ("plots", "allow_small_sigma"):
                setattr(cfg, key, bool(value))
            else:
                raise ConfigError(f"field {key}: unknown configuration key")

    if args.problem is not None:
        cfg.problem = _KINDS[args.problem.lower()]
    if args.alpha is not None:
        cfg.alpha = args.alpha
    if args.epsilon2 is not None:
        cfg.epsilon2 = args.epsilon2
    if args.sigma is not None:
        cfg.sigma_list = _parse_float_list(args.sigma)
    if args.L is not None:
        cfg.L = args.L
    if args.T is not None:
        cfg.T = args.T
    if args.N is not None:
        cfg.N_list = _parse_int_list(args.N)
    if args.M is not None:
        cfg.M_list = _parse_int_list(args.M)
    if args.precond is not None:
        cfg.precond_list = [tok for tok in args.precond.split(",") if tok]
    if args.out is not None:
        cfg.out = Path(args.out)
    if args.plots:
        cfg.plots = True
    if args.allow_small_sigma:
        cfg.allow_small_sigma = True
    if args.newton_tol is not None:
        cfg.newton_tol = args.newton_tol
    if args.krylov_tol is not None:
        cfg.krylov_tol = args.krylov_tol
    if args.dense_cap is not None:
        cfg.dense_cap = args.dense_cap
    cfg.validate()
    return cfg


def _pool_size(n_tasks: int) -> int:
    cap = os.environ.get("FRACHC_THREADS")
    limit = int(cap) if cap else (os.cpu_count() or 1)
    return max(1, min(n_tasks, limit))


class _Log:
    """Sidecar plain-text log; the only artifact carrying timestamps."""

    def __init__(self, out_dir: Path):
        self.path = out_dir / "run.log"
        self.lines: List[str] = []

    def note(self, message: str) -> None:
        stamp = datetime.datetime.now().isoformat(timespec="seconds")
        self.lines.append(f"{stamp} {message}")

    def flush(self) -> None:
        self.path.write_text("\n".join(self.lines) + "\n")


def _single_run(cfg: RunConfig, N: int, M: int, sigma: float, variant: str,
                record_energy: bool = False):
    params = cfg.params(sigma=sigma)
    try:
        disc = Discretization.build(params, N=N, M=M)
        problem = make_problem(cfg.problem, params)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    record = stepper.run(problem, params, disc, cfg.newton_config(),
                         cfg.krylov_config(), variant,
                         record_energy=record_energy, dense_cap=cfg.dense_cap)
    return params, disc, problem, record


def cmd_simulate(cfg: RunConfig) -> int:
    out = cfg.out
    out.mkdir(parents=True, exist_ok=True)
    log = _Log(out)
    N = cfg.n_list([128])[0]
    M = cfg.m_list([2048])[0]
    log.note(f"simulate problem={cfg.problem.value} alpha={cfg.alpha} "
             f"N={N} M={M} precond={cfg.precond}")
    params, disc, problem, rec = _single_run(cfg, N, M, cfg.sigma,
                                             cfg.precond, record_energy=True)

    rows = []
    for j in range(disc.M):
        mean_k = (sum(rec.krylov_iters[j]) / len(rec.krylov_iters[j])
                  if rec.krylov_iters[j] else 0.0)
        rows.append((rec.times[j + 1], rec.energy[j + 1], rec.modified_energy[j],
                     rec.sup_norm[j + 1], int(rec.newton_iters[j]), mean_k))
    output.write_csv(out / "trace.csv",
                     ["time", "energy", "modified_energy", "sup_phi",
                      "newton_iters", "mean_krylov_iters"], rows)

    x = interior_nodes(params, disc)
    output.write_csv(out / "final_state.csv", ["x", "phi", "mu"],
                     zip(x, rec.final_phi, rec.final_mu))

    iter1, iter2 = iteration_stats(rec)
    summary = [("problem", cfg.problem.value), ("alpha", params.alpha),
               ("epsilon2", params.epsilon2), ("sigma", params.sigma),
               ("L", params.L), ("T", params.T), ("N", disc.N), ("M", disc.M),
               ("precond", cfg.precond), ("iter1_avg", iter1),
               ("iter2_avg", iter2), ("final_energy", rec.energy[-1]),
               ("final_modified_energy", rec.modified_energy[-1]),
               ("max_sup_phi", float(rec.sup_norm.max()))]
    output.write_csv(out / "summary.csv", [k for k, _ in summary],
                     [[v for _, v in summary]])

    if cfg.plots:
        output.write_svg_lines(out / "energy_trace.svg",
                               [("energy", rec.times[1:], rec.energy[1:]),
                                ("modified", rec.times[1:], rec.modified_energy)],
                               title="energy decay", xlabel="t", ylabel="energy")
        output.write_svg_lines(out / "final_profile.svg",
                               [("phi", x, rec.final_phi)],
                               title=f"phi at T={params.T:g}", xlabel="x",
                               ylabel="phi")
    log.note(f"nonlinear-solve seconds: {rec.solve_seconds:.3f}")
    log.flush()
    return 0


def _ladder(cfg: RunConfig, entries: Sequence[Tuple[int, int]]):
    """Run (N, M) ladder entries on a worker pool, deterministically ordered."""
    results: Dict[Tuple[int, int], tuple] = {}

    def task(nm):
        N, M = nm
        return nm, _single_run(cfg, N, M, cfg.sigma, cfg.precond)

    with ThreadPoolExecutor(max_workers=_pool_size(len(entries))) as pool:
        for nm, res in pool.map(task, entries):
            results[nm] = res
    return [results[nm] for nm in entries]


def _order_rows(cfg: RunConfig, entries: Sequence[Tuple[int, int]],
                steps: Sequence[float], levels: Sequence[int]):
    runs = _ladder(cfg, entries)
    reports = [error_metrics(rec.final_phi, problem, params, disc)
               for params, disc, problem, rec in runs]
    rows = []
    for i, (level, step, rep) in enumerate(zip(levels, steps, reports)):
        if i == 0:
            co_inf = co_2 = ""
        else:
            co_inf = convergence_order(reports[i - 1].err_inf, rep.err_inf,
                                       steps[i - 1], step)
            co_2 = convergence_order(reports[i - 1].err_2, rep.err_2,
                                     steps[i - 1], step)
        rows.append((level, step, rep.err_inf, co_inf, rep.err_2, co_2))
    return rows


def cmd_order_time(cfg: RunConfig) -> int:
    if cfg.problem is ProblemKind.EXAMPLE2:
        raise ConfigError("field problem: order studies need an exact solution "
                          "(example1 or example_a)")
    out = cfg.out
    out.mkdir(parents=True, exist_ok=True)
    log = _Log(out)
    Ms = cfg.m_list([8, 16, 32, 64, 128])
    N = cfg.n_list([2048])[0]
    log.note(f"order-time problem={cfg.problem.value} alpha={cfg.alpha} "
             f"N={N} M={Ms}")
    params = cfg.params()
    taus = [params.T / M for M in Ms]
    rows = _order_rows(cfg, [(N, M) for M in Ms], taus, Ms)
    output.write_csv(out / "order_time.csv",
                     ["M", "tau", "err_inf", "co_inf_tau", "err_2", "co_2_tau"],
                     rows)
    if cfg.plots:
        output.write_svg_lines(out / "order_time.svg",
                               [("err_inf", taus, [r[2] for r in rows]),
                                ("err_2", taus, [r[4] for r in rows])],
                               title="temporal convergence", xlabel="tau",
                               ylabel="error", logx=True, logy=True)
    log.flush()
    return 0


def cmd_order_space(cfg: RunConfig) -> int:
    if cfg.problem is ProblemKind.EXAMPLE2:
        raise ConfigError("field problem: order studies need an exact solution "
                          "(example1 or example_a)")
    out = cfg.out
    out.mkdir(parents=True, exist_ok=True)
    log = _Log(out)
    Ns = cfg.n_list([16, 32, 64, 128, 256])
    M = cfg.m_list([1024])[0]
    log.note(f"order-space problem={cfg.problem.value} alpha={cfg.alpha} "
             f"N={Ns} M={M}")
    params = cfg.params()
    hs = [2.0 * params.L / N for N in Ns]
    rows = _order_rows(cfg, [(N, M) for N in Ns], hs, Ns)
    output.write_csv(out / "order_space.csv",
                     ["N", "h", "err_inf", "co_inf_h", "err_2", "co_2_h"],
                     rows)
    if cfg.plots:
        output.write_svg_lines(out / "order_space.svg",
                               [("err_inf", hs, [r[2] for r in rows]),
                                ("err_2", hs, [r[4] for r in rows])],
                               title="spatial convergence", xlabel="h",
                               ylabel="error", logx=True, logy=True)
    log.flush()
    return 0


def cmd_sigma_sweep(cfg: RunConfig) -> int:
    if cfg.problem is ProblemKind.EXAMPLE2:
        raise ConfigError("field problem: the sigma sweep needs an exact "
                          "solution (example1 or example_a)")
    out = cfg.out
    out.mkdir(parents=True, exist_ok=True)
    log = _Log(out)
    Ms = cfg.m_list([8, 16, 32, 64, 128])
    N = cfg.n_list([2048])[0]
    log.note(f"sigma-sweep problem={cfg.problem.value} alpha={cfg.alpha} "
             f"N={N} M={Ms} sigma={cfg.sigma_list}")
    series = []
    for sigma in cfg.sigma_list:
        params = cfg.params(sigma=sigma)
        taus = [params.T / M for M in Ms]
        sweep = replace(cfg, sigma_list=[sigma])
        rows = _order_rows(sweep, [(N, M) for M in Ms], taus, Ms)
        data = [(M, tau, r[2], r[4]) for M, tau, r in zip(Ms, taus, rows)]
        output.write_csv(out / f"sweep_sigma_{sigma:g}.csv",
                         ["M", "tau", "err_inf", "err_2"], data)
        series.append((f"sigma={sigma:g}", taus, [r[2] for r in rows]))
    if cfg.plots:
        output.write_svg_lines(out / "sigma_sweep.svg", series,
                               title="error vs tau", xlabel="tau",
                               ylabel="err_inf", logx=True, logy=True)
    log.flush()
    return 0


def cmd_precond_bench(cfg: RunConfig) -> int:
    out = cfg.out
    out.mkdir(parents=True, exist_ok=True)
    log = _Log(out)
    Ns = cfg.n_list([64, 128, 256])
    Ms = cfg.m_list(Ns)  # benchmark protocol pairs M = N
    if len(Ms) == 1:
        Ms = Ms * len(Ns)
    if len(Ms) != len(Ns):
        raise ConfigError("field M: list must be a singleton or match N list")
    for variant in cfg.precond_list:
        if variant == "dense":
            for N in Ns:
                if N - 1 > cfg.dense_cap:
                    raise ConfigError(f"field precond: dense variant refused "
                                      f"for N={N} above cap {cfg.dense_cap}")
    log.note(f"precond-bench problem={cfg.problem.value} alpha={cfg.alpha} "
             f"N={Ns} M={Ms} variants={cfg.precond_list}")

    tasks = [(variant, N, M) for variant in cfg.precond_list
             for N, M in zip(Ns, Ms)]
    results = {}

    def task(key):
        variant, N, M = key
        return key, _single_run(cfg, N, M, cfg.sigma, variant)

    with ThreadPoolExecutor(max_workers=_pool_size(len(tasks))) as pool:
        for key, res in pool.map(task, tasks):
            results[key] = res

    rows = []
    for key in tasks:
        variant, N, M = key
        _, _, _, rec = results[key]
        iter1, iter2 = iteration_stats(rec)
        rows.append((variant, N, M, iter1, iter2, rec.solve_seconds))
        log.note(f"{variant} N={N} M={M}: iter1={iter1:.2f} iter2={iter2:.2f} "
                 f"seconds={rec.solve_seconds:.3f}")
    output.write_csv(out / "precond_bench.csv",
                     ["variant", "N", "M", "iter1", "iter2", "seconds"], rows)
    log.flush()
    return 0


def cmd_export_operator(cfg: RunConfig) -> int:
    out = cfg.out
    out.mkdir(parents=True, exist_ok=True)
    log = _Log(out)
    N = cfg.n_list([128])[0]
    if N - 1 > cfg.dense_cap:
        raise ConfigError(f"field N: export refused for N={N} above dense cap "
                          f"{cfg.dense_cap}")
    M = cfg.m_list([128])[0]
    params = cfg.params()
    disc = Discretization.build(params, N=N, M=M)
    problem = make_problem(cfg.problem, params)
    op = build_operator(params, disc)
    log.note(f"export-operator problem={cfg.problem.value} alpha={cfg.alpha} "
             f"N={N} M={M}")

    def dump(name: str, matrix: np.ndarray) -> None:
        header = [f"c{j}" for j in range(matrix.shape[1])]
        output.write_csv(out / name, header, matrix)

    dump("operator_G.csv", op.dense())
    dump("operator_sk_G.csv", strang_skew_circulant(op).dense())
    dump("operator_s_G.csv", strang_circulant(op).dense())

    # Jacobian at the first implicit step's initial Newton iterate.
    x = interior_nodes(params, disc)
    phi0 = np.asarray(problem.initial_condition(x), dtype=float)
    f0 = problem.source_f(x, 0.0) if problem.has_sources else None
    psi0 = problem.source_psi(x, 0.0) if problem.has_sources else None
    first_step(phi0, op, params, disc, f0, psi0)
    J = BlockJacobian(op.toeplitz, disc.tau, params.epsilon2, params.sigma,
                      phi0 ** 2)
    dump("jacobian_first_newton.csv", J.dense())
    log.flush()
    return 0


_COMMANDS = {
    "simulate": cmd_simulate,
    "order-time": cmd_order_time,
    "order-space": cmd_order_space,
    "sigma-sweep": cmd_sigma_sweep,
    "precond-bench": cmd_precond_bench,
    "export-operator": cmd_export_operator,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="frachc",
        description="Fractional Cahn-Hilliard solver: energy-stable BDF2 "
                    "time stepping with FFT-preconditioned Newton-Krylov.",
        epilog="FRACHC_THREADS caps the worker pool for ladder commands.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", type=Path, default=None,
                        help="TOML configuration file (flags override it)")
        sp.add_argument("--problem", choices=sorted(_KINDS), default=None)
        sp.add_argument("--alpha", type=float, default=None)
        sp.add_argument("--epsilon2", type=float, default=None)
        sp.add_argument("--sigma", type=str, default=None,
                        help="stabilization coefficient (comma list for sweeps)")
        sp.add_argument("--L", type=float, default=None)
        sp.add_argument("--T", type=float, default=None)
        sp.add_argument("--N", type=str, default=None,
                        help="spatial cells (comma list for ladders)")
        sp.add_argument("--M", type=str, default=None,
                        help="time steps (comma list for ladders)")
        sp.add_argument("--precond", type=str, default=None,
                        help="none|skew|circ|dense (comma list for benchmarks)")
        sp.add_argument("--out", type=Path, default=None)
        sp.add_argument("--plots", action="store_true")
        sp.add_argument("--allow-small-sigma", action="store_true")
        sp.add_argument("--newton-tol", type=float, default=None)
        sp.add_argument("--krylov-tol", type=float, default=None)
        sp.add_argument("--dense-cap", type=int, default=None)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
    except ConfigError as exc:
        print(f"frachc: invalid configuration: {exc}", file=sys.stderr)
        return 2
    try:
        return _COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"frachc: invalid configuration: {exc}", file=sys.stderr)
        return 2
    except stepper.StepFailureError as exc:
        print(f"frachc: step failure at index {exc.step_index}: {exc}",
              file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
