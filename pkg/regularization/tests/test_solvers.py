import numpy as np
from django.test import SimpleTestCase
from numpy.testing import assert_allclose

from regularization.exceptions import ArgumentError
from regularization.krylov import arnoldi
from regularization.linalg import DenseOperator, householder_qr, jacobi_svd
from regularization.problems import add_noise, blur2d, phillips, shaw
from regularization.solvers import (
    SOLVER_NAMES,
    StoppingRule,
    StopReason,
    build_qr_chain,
    discrepancy_stop,
    gmres,
    qmr,
    rr_gmres,
    rr_qmr,
    run_solver,
    tsvd,
    tsvd_solve,
)


def _well_conditioned(n, seed):
    rng = np.random.default_rng(seed)
    return DenseOperator(np.eye(n) + 0.3 * rng.standard_normal((n, n)) / np.sqrt(n)), rng


class StoppingRuleTests(SimpleTestCase):
    def setUp(self):
        self.rule = StoppingRule(epsilon=2.0, eta=1.01)

    def test_below_threshold(self):
        self.assertTrue(discrepancy_stop(0.9 * 1.01 * 2.0, self.rule))

    def test_boundary_counts_as_stop(self):
        self.assertTrue(discrepancy_stop(self.rule.threshold, self.rule))

    def test_above_threshold(self):
        self.assertFalse(discrepancy_stop(1.1 * 1.01 * 2.0, self.rule))

    def test_invalid_rules(self):
        with self.assertRaises(ArgumentError):
            StoppingRule(epsilon=1.0, eta=1.0)
        with self.assertRaises(ArgumentError):
            StoppingRule(epsilon=-1.0)
        with self.assertRaises(ArgumentError):
            StoppingRule(epsilon=1.0, max_iter=0)


class KrylovSolverTests(SimpleTestCase):
    def test_identity_converges_in_one_step(self):
        b = np.array([1.0, -2.0, 3.0])
        for solve in (gmres, qmr):
            with self.subTest(solver=solve.__name__):
                result = solve(DenseOperator(np.eye(3)), b, StoppingRule(epsilon=0.0))
                self.assertEqual(result.iterations, 1)
                assert_allclose(result.solution, b, atol=1e-14)
                self.assertLessEqual(result.final_residual, 1e-14)

    def test_gmres_matches_direct_solve(self):
        A, rng = _well_conditioned(8, 1)
        b = rng.standard_normal(8)
        result = gmres(A, b, StoppingRule(epsilon=0.0, max_iter=8))
        expected = np.linalg.solve(A.matrix, b)
        self.assertLessEqual(np.linalg.norm(result.solution - expected), 1e-8 * np.linalg.norm(expected))

    def test_small_system_direct_solve(self):
        A, rng = _well_conditioned(5, 2)
        b = rng.standard_normal(5)
        expected = np.linalg.solve(A.matrix, b)
        for solve in (gmres, qmr):
            with self.subTest(solver=solve.__name__):
                result = solve(A, b, StoppingRule(epsilon=0.0, max_iter=5))
                assert_allclose(result.solution, expected, rtol=1e-8, atol=1e-8 * np.linalg.norm(expected))

    def test_qmr_matches_gmres_on_symmetric_operator(self):
        problem = phillips(64)
        stop = StoppingRule(epsilon=0.0, max_iter=10)
        reference = gmres(problem.A, problem.b_exact, stop, keep_iterates=True)
        candidate = qmr(problem.A, problem.b_exact, stop, keep_iterates=True)
        self.assertEqual(reference.iterations, candidate.iterations)
        for x_g, x_q in zip(reference.iterates, candidate.iterates):
            self.assertLessEqual(np.linalg.norm(x_q - x_g), 1e-6 * np.linalg.norm(x_g))

    def test_symmetric_collapse_with_noise(self):
        problem = phillips(256)
        b = add_noise(problem, 1.0, 1).b
        stop = StoppingRule(epsilon=0.0, max_iter=10)
        pairs = [
            (gmres(problem.A, b, stop, keep_iterates=True), qmr(problem.A, b, stop, keep_iterates=True)),
            (rr_gmres(problem.A, b, 1, stop, keep_iterates=True), rr_qmr(problem.A, b, 1, stop, keep_iterates=True)),
        ]
        for reference, candidate in pairs:
            with self.subTest(solver=candidate.label):
                for x_g, x_q in zip(reference.iterates, candidate.iterates):
                    self.assertLessEqual(np.linalg.norm(x_q - x_g), 1e-6 * np.linalg.norm(x_g))

    def test_range_restricted_iterates_lie_in_shifted_krylov_space(self):
        A, rng = _well_conditioned(10, 3)
        b = rng.standard_normal(10)
        m = 3
        for ell in (1, 2, 3):
            with self.subTest(ell=ell):
                result = rr_gmres(A, b, ell, StoppingRule(epsilon=0.0, max_iter=m), keep_iterates=True)
                x = result.iterates[m - 1]
                powers = [np.linalg.matrix_power(A.matrix, ell + k) @ b for k in range(m)]
                Q, _ = householder_qr(np.column_stack(powers))
                basis = Q[:, :m]
                self.assertLessEqual(np.linalg.norm(x - basis @ (basis.T @ x)), 1e-8 * np.linalg.norm(x))

    def test_residual_history_is_nonincreasing(self):
        problem = shaw(64)
        b = add_noise(problem, 1.0, 2).b
        stop = StoppingRule(epsilon=0.0, max_iter=12)
        for label, result in (("gmres", gmres(problem.A, b, stop)), ("rrgmres", rr_gmres(problem.A, b, 1, stop))):
            with self.subTest(solver=label):
                history = np.array(result.residual_history)
                self.assertGreater(len(history), 5)
                self.assertTrue(np.all(np.diff(history) <= 1e-10 * history[0]))

    def test_gmres_projected_residual_matches_explicit_residual(self):
        problem = phillips(128)
        b = add_noise(problem, 1.0, 6).b
        result = gmres(problem.A, b, StoppingRule(epsilon=0.0, max_iter=15), keep_iterates=True)
        self.assertEqual(len(result.projected_residual_history), result.iterations)
        for m, (projected, x) in enumerate(zip(result.projected_residual_history, result.iterates), start=1):
            explicit = np.linalg.norm(b - problem.A.apply(x))
            self.assertLessEqual(abs(projected - explicit), 1e-8 * explicit, msg=f"m={m}")

    def test_range_restricted_iterates_on_test_problems(self):
        cases = [(phillips(64), (3, 6, 10)), (shaw(64), (2, 4)), (blur2d(16), (3, 6, 10))]
        for problem, sizes in cases:
            b = add_noise(problem, 1.0, 5).b
            for ell in (1, 2, 3):
                shifted = b
                for _ in range(ell):
                    shifted = problem.A.apply(shifted)
                result = rr_gmres(
                    problem.A, b, ell, StoppingRule(epsilon=0.0, max_iter=max(sizes)), keep_iterates=True
                )
                for m in sizes:
                    with self.subTest(problem=problem.name, ell=ell, m=m):
                        x = result.iterates[m - 1]
                        basis = arnoldi(problem.A, shifted, m).V[:, :m]
                        self.assertLessEqual(np.linalg.norm(x - basis @ (basis.T @ x)), 1e-8 * np.linalg.norm(x))

    def test_discrepancy_stop_is_honoured(self):
        problem = phillips(128)
        noisy = add_noise(problem, 1.0, 4)
        stop = StoppingRule(epsilon=noisy.noise_norm, eta=1.01)
        for solve in (gmres, qmr):
            with self.subTest(solver=solve.__name__):
                result = solve(problem.A, noisy.b, stop, x_true=problem.x_true)
                self.assertEqual(result.stop_reason, StopReason.DISCREPANCY)
                self.assertLessEqual(result.final_residual, stop.threshold)
                self.assertEqual(len(result.error_history), result.iterations)
                self.assertGreater(result.residual_history[-2], stop.threshold)

    def test_shifted_solver_on_identity_reports_breakdown(self):
        b = np.array([2.0, 0.0, -1.0, 1.0])
        for solve in (rr_gmres, rr_qmr):
            with self.subTest(solver=solve.__name__):
                result = solve(DenseOperator(np.eye(4)), b, 1, StoppingRule(epsilon=0.0))
                self.assertEqual(result.stop_reason, StopReason.BREAKDOWN)
                self.assertEqual(result.iterations, 1)
                assert_allclose(result.solution, b, atol=1e-14)

    def test_max_iterations(self):
        problem = shaw(64)
        b = add_noise(problem, 1.0, 1).b
        result = qmr(problem.A, b, StoppingRule(epsilon=1e-12, max_iter=3))
        self.assertEqual(result.stop_reason, StopReason.MAX_ITERATIONS)
        self.assertEqual(result.iterations, 3)
        self.assertIsNone(result.error_history)
        self.assertIsNone(result.iterates)

    def test_invalid_arguments(self):
        A = DenseOperator(np.eye(3))
        stop = StoppingRule(epsilon=0.0)
        with self.assertRaises(ArgumentError):
            gmres(A, np.zeros(3), stop)
        with self.assertRaises(ArgumentError):
            gmres(A, np.ones(4), stop)
        with self.assertRaises(ArgumentError):
            rr_gmres(A, np.ones(3), -1, stop)
        with self.assertRaises(ArgumentError):
            gmres(DenseOperator(np.ones((3, 2))), np.ones(3), stop)


class QRChainTests(SimpleTestCase):
    def test_base_case_factors_projection(self):
        problem = shaw(64)
        decomposition = arnoldi(problem.A, problem.b_exact, 6)
        chain = build_qr_chain(decomposition.H, 0, 6)
        assert_allclose(chain.Q_factors[0] @ chain.R_factors[0], decomposition.H, atol=1e-12)

    def test_one_shift_chain_relation(self):
        problem = phillips(64)
        m = 4
        decomposition = arnoldi(problem.A, problem.b_exact, m + 1)
        chain = build_qr_chain(decomposition.H, 1, m)
        # A·V_{m+1}·Q1[:, :m] = V_{m+2}·Q2[:, :m]·R2[:m, :m]
        W = decomposition.V[:, :m + 1] @ chain.Q_factors[0][:, :m]
        left = problem.A.to_dense() @ W @ np.linalg.inv(chain.top_block)
        right = decomposition.V @ chain.Q_factors[1][:, :m]
        assert_allclose(left, right, atol=1e-10)
        assert_allclose(right.T @ right, np.eye(m), atol=1e-10)

    def test_two_shift_basis_orthonormal(self):
        problem = shaw(64)
        m = 5
        decomposition = arnoldi(problem.A, problem.b_exact, m + 2)
        chain = build_qr_chain(decomposition.H, 2, m)
        columns = decomposition.V[:, :m + 2] @ chain.Q_factors[1][:, :m]
        assert_allclose(columns.T @ columns, np.eye(m), atol=1e-10)

    def test_projection_too_small(self):
        with self.assertRaises(ArgumentError):
            build_qr_chain(np.ones((3, 2)), 1, 2)


class TSVDTests(SimpleTestCase):
    def test_full_rank_inverse(self):
        M = np.array([[4.0, 1.0, 0.0], [1.0, 3.0, 1.0], [0.0, 1.0, 2.0]])
        b = np.array([1.0, 2.0, 3.0])
        assert_allclose(tsvd(jacobi_svd(M), b, 3), np.linalg.solve(M, b), atol=1e-10)

    def test_one_term(self):
        x = tsvd(jacobi_svd(np.diag([2.0, 1.0])), np.array([2.0, 1.0]), 1)
        assert_allclose(x, [1.0, 0.0], atol=1e-15)

    def test_matches_truncated_pseudo_inverse(self):
        rng = np.random.default_rng(6)
        M = rng.standard_normal((6, 6))
        b = rng.standard_normal(6)
        U, s, Vt = np.linalg.svd(M)
        svd = jacobi_svd(M)
        for k in range(1, 7):
            with self.subTest(k=k):
                expected = Vt[:k].T @ ((U[:, :k].T @ b) / s[:k])
                assert_allclose(tsvd(svd, b, k), expected, atol=1e-11 * np.linalg.norm(expected))

    def test_truncation_index_bounds(self):
        svd = jacobi_svd(np.diag([2.0, 1.0]))
        with self.assertRaises(ArgumentError):
            tsvd(svd, np.ones(2), 0)
        with self.assertRaises(ArgumentError):
            tsvd(svd, np.ones(2), 3)

    def test_sweep_agrees_with_single_truncations(self):
        problem = shaw(32)
        b = add_noise(problem, 1.0, 3).b
        svd = jacobi_svd(problem.A.to_dense())
        result = tsvd_solve(problem.A, svd, b, StoppingRule(epsilon=0.0, max_iter=5), keep_iterates=True)
        self.assertEqual(result.iterations, 5)
        for m, x in enumerate(result.iterates, start=1):
            assert_allclose(x, tsvd(svd, b, m), atol=1e-10 * np.linalg.norm(x))


class RunSolverTests(SimpleTestCase):
    def test_dispatch_by_name(self):
        problem = phillips(32)
        b = add_noise(problem, 1.0, 1).b
        stop = StoppingRule(epsilon=0.01 * np.linalg.norm(problem.b_exact))
        for name in SOLVER_NAMES:
            ell = 1 if name.startswith("rr") else 0
            with self.subTest(solver=name):
                result = run_solver(name, problem.A, b, ell, stop, x_true=problem.x_true)
                self.assertEqual(result.label, name)
                self.assertEqual(result.ell, ell)
                self.assertGreaterEqual(result.iterations, 1)

    def test_unknown_solver(self):
        with self.assertRaisesMessage(ArgumentError, 'unknown solver "minres"'):
            run_solver("minres", DenseOperator(np.eye(2)), np.ones(2), 0, StoppingRule(epsilon=0.0))

    def test_shift_on_unshifted_solver(self):
        with self.assertRaises(ArgumentError):
            run_solver("gmres", DenseOperator(np.eye(2)), np.ones(2), 1, StoppingRule(epsilon=0.0))
