import unittest

import numpy as np

from tdvp_toolkit_lib import metrics
from tdvp_toolkit_lib import sampling
from tdvp_toolkit_lib.metrics import AlphaMetric


def matrix_power(rho, s):
    p, V = np.linalg.eigh(rho)
    return (V * p**s) @ V.conj().T


def random_traceless_hermitian(dim, rng):
    A = sampling.random_hermitian(dim, rng)
    return A - np.trace(A) / dim * np.eye(dim)


class TestAlphaMetric(unittest.TestCase):

    def test_validation(self):
        with self.assertRaises(ValueError):
            AlphaMetric.single(1.5)
        with self.assertRaises(ValueError):
            AlphaMetric(((0.5, 0.2),))
        with self.assertRaises(ValueError):
            AlphaMetric(((1.5, 0.2), (-0.5, 0.3)))
        with self.assertRaises(ValueError):
            AlphaMetric.named("bures")
        self.assertEqual(AlphaMetric.named("wigner_yanase").alphas, [0.5])
        self.assertEqual(AlphaMetric.named("rld").alphas, [0.0])

    def test_convex_normalizes(self):
        m = AlphaMetric.convex([(3.0, 0.25), (1.0, 0.75)])
        self.assertAlmostEqual(m.terms[0][0], 0.75)
        self.assertAlmostEqual(m.terms[1][0], 0.25)
        self.assertEqual(m.alphas, [0.25, 0.75])


class TestOmega(unittest.TestCase):

    def setUp(self) -> None:
        self.rng = np.random.default_rng(4)
        self.dim = 4
        self.rho = sampling.random_density_matrix(self.dim, self.rng)

    def test_apply_matches_definition(self):
        sigma = sampling.random_hermitian(self.dim, self.rng)
        for alpha in (0.0, 0.25, 0.5, 0.9):
            expected = 0.5 * (
                matrix_power(self.rho, -alpha) @ sigma @ matrix_power(self.rho, alpha - 1)
                + matrix_power(self.rho, alpha - 1) @ sigma @ matrix_power(self.rho, -alpha)
            )
            out = metrics.omega_apply(self.rho, AlphaMetric.single(alpha), sigma)
            self.assertTrue(np.allclose(out, expected, atol=1e-9))

    def test_inverse(self):
        metric = AlphaMetric.single(0.3)
        sigma = sampling.random_hermitian(self.dim, self.rng)
        tau = metrics.omega_apply(self.rho, metric, sigma)
        self.assertTrue(np.allclose(metrics.omega_inverse(self.rho, metric, tau), sigma))
        # Omega(rho) = I and Omega^-1(I) = rho.
        self.assertTrue(np.allclose(metrics.omega_apply(self.rho, metric, self.rho), np.eye(self.dim)))
        self.assertTrue(np.allclose(metrics.omega_inverse(self.rho, metric, np.eye(self.dim)), self.rho))

    def random_operator(self):
        return self.rng.normal(size=(self.dim, self.dim)) + 1j * self.rng.normal(size=(self.dim, self.dim))

    def test_self_adjoint(self):
        X = self.random_operator()
        Y = self.random_operator()
        for metric in (AlphaMetric.single(0.0), AlphaMetric.single(0.4), AlphaMetric.single(1.0),
                       AlphaMetric.convex([(0.5, 0.1), (0.5, 0.8)])):
            lhs = np.trace(X.conj().T @ metrics.omega_apply(self.rho, metric, Y))
            rhs = np.trace(metrics.omega_apply(self.rho, metric, X).conj().T @ Y)
            self.assertTrue(abs(lhs - rhs) < 1e-9 * max(1.0, abs(lhs)))

    def test_inverse_of_non_hermitian(self):
        X = self.random_operator()
        for alpha in (0.0, 0.5, 1.0):
            metric = AlphaMetric.single(alpha)
            back = metrics.omega_inverse(self.rho, metric, metrics.omega_apply(self.rho, metric, X))
            self.assertTrue(np.allclose(back, X, atol=1e-9))
            forth = metrics.omega_apply(self.rho, metric, metrics.omega_inverse(self.rho, metric, X))
            self.assertTrue(np.allclose(forth, X, atol=1e-9))

    def test_form_is_real_symmetric(self):
        metric = AlphaMetric.single(0.25)
        A = random_traceless_hermitian(self.dim, self.rng)
        B = random_traceless_hermitian(self.dim, self.rng)
        ab = metrics.metric_form(self.rho, metric, A, B)
        ba = metrics.metric_form(self.rho, metric, B, A)
        self.assertAlmostEqual(ab.imag, 0.0, places=10)
        self.assertAlmostEqual(ab, ba, places=10)
        self.assertTrue(metrics.metric_norm(self.rho, metric, A) > 0)

    def test_convexity(self):
        A = random_traceless_hermitian(self.dim, self.rng)
        B = random_traceless_hermitian(self.dim, self.rng)
        mixed = AlphaMetric(((0.3, 0.25), (0.7, 0.75)))
        expected = 0.3 * metrics.metric_form(self.rho, AlphaMetric.single(0.25), A, B) + 0.7 * metrics.metric_form(
            self.rho, AlphaMetric.single(0.75), A, B
        )
        self.assertTrue(abs(metrics.metric_form(self.rho, mixed, A, B) - expected) < 1e-10 * max(1.0, abs(expected)))

    def test_gram(self):
        omega = metrics.Omega(self.rho, AlphaMetric.single(0.5))
        ops = [random_traceless_hermitian(self.dim, self.rng) for _ in range(3)]
        G = omega.gram(ops)
        for j in range(3):
            for k in range(3):
                self.assertAlmostEqual(G[j, k], omega.form(ops[j], ops[k]), places=10)

    def test_monotonicity(self):
        for alpha in (0.25, 0.5, 0.75):
            metric = AlphaMetric.single(alpha)
            for _ in range(10):
                rho = sampling.random_density_matrix(self.dim, self.rng)
                A = random_traceless_hermitian(self.dim, self.rng)
                kraus = sampling.random_kraus(self.dim, 3, self.rng)
                before = metrics.metric_norm(rho, metric, A)
                after = metrics.metric_norm(
                    metrics.apply_channel(kraus, rho), metric, metrics.apply_channel(kraus, A)
                )
                self.assertTrue(after <= before + 1e-8)

    def test_channel_is_trace_preserving(self):
        kraus = sampling.random_kraus(self.dim, 2, self.rng)
        self.assertTrue(np.allclose(sum(K.conj().T @ K for K in kraus), np.eye(self.dim)))
        self.assertAlmostEqual(np.trace(metrics.apply_channel(kraus, self.rho)), 1.0)

    def test_singular_state(self):
        rho = np.diag([1.0, 0.0])
        with self.assertRaises(ValueError):
            metrics.Omega(rho, AlphaMetric.single(0.5))


if __name__ == "__main__":
    unittest.main()
