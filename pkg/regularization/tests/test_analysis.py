import numpy as np
from django.test import SimpleTestCase
from numpy.testing import assert_allclose

from regularization.analysis import (
    decay_index,
    projected_spectrum,
    relative_error,
    relative_residual,
    semiconvergence_curve,
    tsvd_error_curve,
)
from regularization.exceptions import ArgumentError
from regularization.krylov import arnoldi, bilanczos
from regularization.linalg import DenseOperator, jacobi_svd
from regularization.problems import add_noise, phillips, shaw
from regularization.solvers import SolveResult, StopReason, build_qr_chain


def _result(errors):
    return SolveResult(
        solution=np.zeros(2),
        iterations=len(errors or ()),
        residual_history=tuple(1.0 for _ in errors or ()),
        stop_reason=StopReason.MAX_ITERATIONS,
        error_history=tuple(errors) if errors is not None else None,
    )


class MetricTests(SimpleTestCase):
    def test_relative_error(self):
        x_true = np.array([3.0, 4.0])
        self.assertEqual(relative_error(x_true, x_true), 0.0)
        self.assertEqual(relative_error(np.zeros(2), x_true), 1.0)
        self.assertAlmostEqual(relative_error(np.array([3.0, 0.0]), x_true), 0.8, places=15)

    def test_relative_error_is_scale_invariant(self):
        rng = np.random.default_rng(1)
        x, x_true = rng.standard_normal(10), rng.standard_normal(10)
        self.assertAlmostEqual(relative_error(7.5 * x, 7.5 * x_true), relative_error(x, x_true), delta=1e-14)

    def test_relative_error_rejects_zero_reference(self):
        with self.assertRaises(ArgumentError):
            relative_error(np.ones(2), np.zeros(2))
        with self.assertRaises(ArgumentError):
            relative_error(np.ones(2), np.ones(3))

    def test_relative_residual(self):
        rng = np.random.default_rng(2)
        M = rng.standard_normal((5, 5))
        A = DenseOperator(M)
        x, b, b_exact = rng.standard_normal(5), rng.standard_normal(5), rng.standard_normal(5)
        expected = np.linalg.norm(b - M @ x) / np.linalg.norm(b_exact)
        self.assertAlmostEqual(relative_residual(A, x, b, b_exact), expected, delta=1e-14)
        self.assertAlmostEqual(
            relative_residual(A, np.zeros(5), b, b_exact), np.linalg.norm(b) / np.linalg.norm(b_exact), delta=1e-14
        )
        self.assertEqual(relative_residual(DenseOperator(np.eye(2)), np.ones(2), np.ones(2), np.ones(2)), 0.0)

    def test_relative_residual_rejects_zero_exact_data(self):
        with self.assertRaises(ArgumentError):
            relative_residual(DenseOperator(np.eye(2)), np.ones(2), np.ones(2), np.zeros(2))


class SemiconvergenceTests(SimpleTestCase):
    def test_interior_minimum(self):
        summary = semiconvergence_curve(_result([0.5, 0.2, 0.4]))
        self.assertEqual(summary.argmin, 2)
        self.assertEqual(summary.min_error, 0.2)
        self.assertEqual(summary.final_error, 0.4)

    def test_monotone_history(self):
        self.assertEqual(semiconvergence_curve(_result([0.9, 0.5, 0.1])).argmin, 3)

    def test_missing_history(self):
        with self.assertRaises(ArgumentError):
            semiconvergence_curve(_result(None))

    def test_tsvd_error_curve_is_u_shaped(self):
        problem = shaw(200)
        b = add_noise(problem, 1.0, 1).b
        svd = jacobi_svd(problem.A.to_dense())
        curve = tsvd_error_curve(svd, b, problem.x_true, 60)
        self.assertEqual(len(curve), 60)
        best = min(curve)
        self.assertLessEqual(best, 0.5 * curve[0])
        self.assertLessEqual(best, 0.5 * curve[-1])


class SpectrumTests(SimpleTestCase):
    def test_single_step(self):
        problem = shaw(32)
        report = projected_spectrum("gmres", problem.A, problem.b_exact, 1)
        H = arnoldi(problem.A, problem.b_exact, 1).H
        self.assertEqual(len(report.singular_values), 1)
        self.assertAlmostEqual(report.singular_values[0], np.linalg.norm(H[:, 0]), delta=1e-14)

    def test_matches_explicit_projection(self):
        problem = phillips(64)
        b = add_noise(problem, 1.0, 1).b
        m = 8
        H = arnoldi(problem.A, b, m).H
        T = bilanczos(problem.A, b, m).T
        cases = [
            ("gmres", 0, H),
            ("qmr", 0, T),
            ("gmres", 1, build_qr_chain(arnoldi(problem.A, b, m + 1).H, 1, m).top_block),
            ("qmr", 2, build_qr_chain(bilanczos(problem.A, b, m + 2).T, 2, m).top_block),
        ]
        for kind, ell, matrix in cases:
            with self.subTest(kind=kind, ell=ell):
                report = projected_spectrum(kind, problem.A, b, m, ell)
                self.assertEqual(report.m, m)
                self.assertFalse(report.breakdown)
                assert_allclose(report.singular_values, jacobi_svd(matrix).singular_values, atol=1e-12)
                values = np.array(report.singular_values)
                self.assertTrue(np.all(values >= 0.0))
                self.assertTrue(np.all(np.diff(values) <= 0.0))

    def test_deterministic(self):
        problem = phillips(64)
        b = add_noise(problem, 1.0, 2).b
        first = projected_spectrum("qmr", problem.A, b, 10, 1)
        second = projected_spectrum("qmr", problem.A, b, 10, 1)
        self.assertEqual(first, second)

    def test_breakdown_is_flagged(self):
        report = projected_spectrum("gmres", DenseOperator(np.eye(3)), np.ones(3), 4)
        self.assertTrue(report.breakdown)
        self.assertEqual(report.m, 1)
        assert_allclose(report.singular_values, [1.0], atol=1e-15)

    def test_unknown_solver(self):
        with self.assertRaises(ArgumentError):
            projected_spectrum("tsvd", DenseOperator(np.eye(3)), np.ones(3), 2)

    def test_decay_index(self):
        self.assertEqual(decay_index([1.0, 1e-3, 1e-9, 1e-12]), 3)
        self.assertEqual(decay_index([1.0, 0.5]), 3)
        self.assertEqual(decay_index([2.0, 1e-6], threshold=1e-5), 2)
