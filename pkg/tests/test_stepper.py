import numpy as np
import pytest

import frachc.stepper as stepper
from frachc.frac_operator import build_operator
from frachc.krylov import BlockJacobian, KrylovConfig, dense_block_solve
from frachc.model import (Discretization, ModelParams, ProblemKind,
                          default_params, interior_nodes, make_problem)
from frachc.stepper import (NewtonConfig, SchemeState, StepFailureError,
                            first_step, newton_solve, residual, run)


def _example2(N, M, T=1.0, alpha=1.5):
    p = default_params(ProblemKind.EXAMPLE2, alpha=alpha, T=T)
    d = Discretization.build(p, N=N, M=M)
    return p, d, build_operator(p, d), make_problem(ProblemKind.EXAMPLE2, p)


def _example1(N, M, alpha=1.5):
    p = default_params(ProblemKind.EXAMPLE1, alpha=alpha)
    d = Discretization.build(p, N=N, M=M)
    return p, d, build_operator(p, d), make_problem(ProblemKind.EXAMPLE1, p)


class TestFirstStep:
    def test_zero_state_fixed_point(self):
        p, d, op, _ = _example2(16, 4)
        phi1, mu0 = first_step(np.zeros(op.size), op, p, d)
        np.testing.assert_array_equal(phi1, np.zeros(op.size))
        np.testing.assert_array_equal(mu0, np.zeros(op.size))

    def test_example2_direct_formulas(self):
        p, d, op, prob = _example2(32, 8)
        x = interior_nodes(p, d)
        phi0 = prob.initial_condition(x)
        phi1, mu0 = first_step(phi0, op, p, d)
        np.testing.assert_allclose(
            mu0, phi0 ** 3 - phi0 - p.epsilon2 * op.matvec(phi0), atol=1e-14)
        np.testing.assert_allclose(phi1, phi0 + d.tau * op.matvec(mu0),
                                   atol=1e-14)

    def test_example2_update_is_order_tau(self):
        diffs = []
        for M in (8, 16):
            p, d, op, prob = _example2(32, M)
            phi0 = prob.initial_condition(interior_nodes(p, d))
            phi1, _ = first_step(phi0, op, p, d)
            diffs.append(np.abs(phi1 - phi0).max())
        assert diffs[1] < 0.7 * diffs[0]

    def test_example1_accuracy_under_refinement(self):
        # against the exact solution at t = tau the start-up error is
        # O(tau^2 + h^2); with N fixed large, halving tau quarters it
        errs = []
        for M in (8, 16, 32):
            p, d, op, prob = _example1(512, M)
            x = interior_nodes(p, d)
            phi0 = prob.initial_condition(x)
            phi1, _ = first_step(phi0, op, p, d,
                                 prob.source_f(x, 0.0), prob.source_psi(x, 0.0))
            errs.append(np.abs(phi1 - prob.exact_phi(x, d.tau)).max())
        assert errs[1] < 0.30 * errs[0]
        assert errs[2] < 0.35 * errs[1]


class TestResidual:
    def _state(self, op, phi_prev, phi_curr):
        return SchemeState(phi_prev=phi_prev, phi_curr=phi_curr,
                           mu_prev=np.zeros_like(phi_prev),
                           mu_curr=np.zeros_like(phi_prev),
                           step_index=1, time=0.0)

    def test_zero_everything(self):
        p, d, op, _ = _example2(16, 4)
        n = op.size
        F = residual(np.zeros(2 * n), self._state(op, np.zeros(n), np.zeros(n)),
                     op, p, d)
        np.testing.assert_array_equal(F, np.zeros(2 * n))

    def test_constructed_root(self, rng):
        # build (phi_prev, mu) so that both block rows vanish identically
        p, d, op, _ = _example2(16, 8)
        n = op.size
        tau = d.tau
        G = op.dense()
        phi_next = rng.uniform(-0.5, 0.5, n)
        phi_curr = rng.uniform(-0.5, 0.5, n)
        # mu = mu0 + phi_prev with mu0 collecting the phi_prev-free terms
        mu0 = (phi_next ** 3 - 2.0 * phi_curr - p.epsilon2 * (G @ phi_next)
               - p.sigma * tau * (G @ (phi_next - phi_curr)))
        # first row: 3 phi_next - 2 tau G (mu0 + phi_prev) - 4 phi_curr + phi_prev = 0
        A = np.eye(n) - 2.0 * tau * G
        rhs = -(3.0 * phi_next - 2.0 * tau * (G @ mu0) - 4.0 * phi_curr)
        phi_prev = np.linalg.solve(A, rhs)
        mu_next = mu0 + phi_prev
        F = residual(np.concatenate([phi_next, mu_next]),
                     self._state(op, phi_prev, phi_curr), op, p, d)
        scale = max(np.abs(mu_next).max(), 1.0)
        assert np.abs(F).max() <= 1e-13 * scale

    def test_matches_dense_assembly(self, rng):
        p, d, op, _ = _example2(9, 8)  # n = 8
        n = op.size
        tau = d.tau
        G = op.dense()
        phi_prev = rng.standard_normal(n)
        phi_curr = rng.standard_normal(n)
        psi_next = rng.standard_normal(2 * n)
        Mblock = np.zeros((2 * n, 2 * n))
        Mblock[:n, :n] = 3.0 * np.eye(n)
        Mblock[:n, n:] = -2.0 * tau * G
        Mblock[n:, :n] = (p.epsilon2 + p.sigma * tau) * G
        Mblock[n:, n:] = np.eye(n)
        rhs = np.concatenate([
            4.0 * phi_curr - phi_prev,
            -2.0 * phi_curr + phi_prev + p.sigma * tau * (G @ phi_curr)
            + psi_next[:n] ** 3,
        ])
        ref = Mblock @ psi_next - rhs
        got = residual(psi_next, self._state(op, phi_prev, phi_curr), op, p, d)
        assert np.abs(got - ref).max() <= 1e-12 * max(1.0, np.abs(ref).max())

    def test_source_placement(self, rng):
        # f enters the first block scaled by 2 tau, psi-source unscaled
        p, d, op, _ = _example2(9, 8)
        n = op.size
        psi_next = rng.standard_normal(2 * n)
        state = self._state(op, rng.standard_normal(n), rng.standard_normal(n))
        f = rng.standard_normal(n)
        s = rng.standard_normal(n)
        base = residual(psi_next, state, op, p, d)
        with_src = residual(psi_next, state, op, p, d, f_next=f, psi_src_next=s)
        np.testing.assert_allclose(base[:n] - with_src[:n], 2.0 * d.tau * f,
                                   atol=1e-13)
        np.testing.assert_allclose(base[n:] - with_src[n:], s, atol=1e-13)


class TestNewton:
    def test_zero_state_converges_immediately(self):
        p, d, op, _ = _example2(16, 4)
        n = op.size
        state = SchemeState(phi_prev=np.zeros(n), phi_curr=np.zeros(n),
                            mu_prev=np.zeros(n), mu_curr=np.zeros(n),
                            step_index=1, time=d.tau)
        psi, iters, counts = newton_solve(state, op, p, d)
        assert iters == 1
        np.testing.assert_array_equal(psi, np.zeros(2 * n))

    def test_quadratic_residual_decay(self):
        p, d, op, prob = _example2(17, 4, T=1.0)  # n = 16, tau = 0.25
        n = op.size
        x = interior_nodes(p, d)
        phi0 = prob.initial_condition(x) + 0.8  # push into the nonlinear regime
        phi1, mu0 = first_step(phi0, op, p, d)
        state = SchemeState(phi_prev=phi0, phi_curr=phi1, mu_prev=mu0,
                            mu_curr=mu0, step_index=1, time=d.tau)
        psi = np.concatenate([phi0, mu0])
        norms = []
        for _ in range(8):
            F = residual(psi, state, op, p, d)
            norms.append(np.linalg.norm(F))
            J = BlockJacobian(op.toeplitz, d.tau, p.epsilon2, p.sigma,
                              psi[:n] ** 2)
            psi = psi - dense_block_solve(J, F)
            if norms[-1] < 1e-14:
                break
        norms = np.array(norms)
        small = np.nonzero(norms < 1e-2)[0]
        k = small[0]
        assert norms[k + 1] <= 10.0 * norms[k] ** 2

    def test_step_failure_carries_index(self):
        p, d, op, prob = _example2(32, 8, T=46.0)
        x = interior_nodes(p, d)
        phi0 = prob.initial_condition(x)
        phi1, mu0 = first_step(phi0, op, p, d)
        state = SchemeState(phi_prev=phi0, phi_curr=phi1, mu_prev=mu0,
                            mu_curr=mu0, step_index=1, time=d.tau)
        with pytest.raises(StepFailureError) as err:
            newton_solve(state, op, p, d, kcfg=KrylovConfig(max_iters=2),
                         precond_variant="none")
        assert err.value.step_index == 1


class TestRun:
    def test_m2_is_first_step_plus_one_solve(self):
        p, d, op, prob = _example2(16, 2)
        rec = run(prob, p, d)
        assert rec.M == 2
        assert rec.newton_iters[0] == 0 and rec.krylov_iters[0] == []
        assert rec.newton_iters[1] >= 1
        assert rec.times[-1] == pytest.approx(p.T)

    def test_bit_identical_reruns(self):
        p, d, _, prob = _example2(32, 8)
        rec1 = run(prob, p, d, record_energy=True)
        rec2 = run(prob, p, d, record_energy=True)
        np.testing.assert_array_equal(rec1.final_phi, rec2.final_phi)
        np.testing.assert_array_equal(rec1.final_mu, rec2.final_mu)
        np.testing.assert_array_equal(rec1.energy, rec2.energy)
        np.testing.assert_array_equal(rec1.modified_energy, rec2.modified_energy)
        np.testing.assert_array_equal(rec1.newton_iters, rec2.newton_iters)

    def test_observer_protocol(self):
        p, d, _, prob = _example2(16, 4)
        seen = []
        run(prob, p, d, observers=[lambda *args: seen.append(args)])
        assert len(seen) == d.M
        j, t, phi, mu, iters, counts = seen[0]
        assert j == 0 and t == pytest.approx(d.tau)
        assert iters == 0 and counts == []
        assert phi.shape == mu.shape == (d.N - 1,)
        assert seen[-1][0] == d.M - 1

    def test_uniform_bound_example2(self):
        p, d, _, prob = _example2(32, 64, T=46.0)
        rec = run(prob, p, d)
        assert rec.sup_norm.max() <= 10.0
        assert rec.sup_norm.max() < 2.0  # observed O(1) magnitude

    def test_energy_decay_small_run(self):
        p, d, _, prob = _example2(32, 32, T=4.0)
        rec = run(prob, p, d, record_energy=True)
        e = rec.modified_energy
        assert np.all(np.diff(e) <= 1e-10 * np.abs(e[:-1]))

    @pytest.mark.parametrize("variant", ["none", "circ", "dense"])
    def test_variants_agree_with_skew(self, variant):
        p, d, _, prob = _example2(16, 8)
        ref = run(prob, p, d, precond_variant="skew")
        other = run(prob, p, d, precond_variant=variant)
        assert np.abs(ref.final_phi - other.final_phi).max() <= 1e-8
        assert np.abs(ref.final_mu - other.final_mu).max() <= 1e-8

    def test_unknown_variant_rejected(self):
        p, d, _, prob = _example2(16, 4)
        with pytest.raises(ValueError):
            run(prob, p, d, precond_variant="magic")


class TestSchemeConsistency:
    @pytest.mark.parametrize("alpha", [1.2, 1.9])
    def test_manufactured_residual_second_order(self, alpha):
        # exact nodal values inserted into the one-step residual shrink
        # like O(tau^2 + h^2) under simultaneous refinement
        norms = []
        for (N, M) in ((64, 64), (128, 128), (256, 256)):
            p, d, op, prob = _example1(N, M, alpha=alpha)
            x = interior_nodes(p, d)
            t_prev, t_curr, t_next = 3 * d.tau, 4 * d.tau, 5 * d.tau
            state = SchemeState(
                phi_prev=prob.exact_phi(x, t_prev),
                phi_curr=prob.exact_phi(x, t_curr),
                mu_prev=prob.exact_mu(x, t_prev),
                mu_curr=prob.exact_mu(x, t_curr),
                step_index=4, time=t_curr)
            psi_exact = np.concatenate([prob.exact_phi(x, t_next),
                                        prob.exact_mu(x, t_next)])
            F = residual(psi_exact, state, op, p, d,
                         prob.source_f(x, t_next), prob.source_psi(x, t_next))
            norms.append(np.abs(F).max())
        assert norms[1] < 0.35 * norms[0]
        assert norms[2] < 0.35 * norms[1]
