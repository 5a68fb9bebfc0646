import unittest

import numpy as np

from tdvp_toolkit_lib import gaussian
from tdvp_toolkit_lib import sampling
from tdvp_toolkit_lib import verification
from tdvp_toolkit_lib.metrics import AlphaMetric


class TestVerification(unittest.TestCase):

    def setUp(self) -> None:
        self.rng = np.random.default_rng(29)

    def test_metric_independence(self):
        report = verification.metric_independence_report(5, n_modes_list=(1, 2), cases=3, alphas=(0.25, 0.75))
        self.assertTrue(report["passed"])
        self.assertEqual([r["n_modes"] for r in report["results"]], [1, 2])
        self.assertEqual(len(report["metrics"]), 3)
        self.assertTrue(report["max_relative_deviation"] < 1e-6)

    def test_report_is_seeded(self):
        a = verification.metric_independence_report(1, n_modes_list=(2,), cases=1, alphas=(0.5,), convex=None)
        b = verification.metric_independence_report(1, n_modes_list=(2,), cases=1, alphas=(0.5,), convex=None)
        self.assertEqual(a["max_relative_deviation"], b["max_relative_deviation"])

    def test_tangent_dimension(self):
        report = verification.tangent_dimension_report((1, 2), seed=3)
        self.assertTrue(report["passed"])
        self.assertEqual([e["rank"] for e in report["entries"]], [1, 6])
        self.assertEqual(report["entries"][1]["alternative"], 12)

    def test_full_density_residual(self):
        spec = sampling.random_spec(2, self.rng)
        rho = sampling.random_density_matrix(4, self.rng)
        for alpha in (0.0, 0.5, 1.0):
            self.assertTrue(verification.full_density_residual(rho, AlphaMetric.single(alpha), spec) < 1e-10)

    def test_inverse_metric_basis_spans_tangent_space(self):
        Gamma = sampling.random_covariance(2, self.rng)
        for alpha in (0.25, 0.5):
            report = verification.inverse_metric_span_report(Gamma, AlphaMetric.single(alpha))
            self.assertEqual(report["tangent_rank"], 6)
            self.assertEqual(report["basis_rank"], 6)
            self.assertEqual(report["joint_rank"], 6)
            self.assertTrue(report["raw_trace_error"] < 1e-10)

    def test_tangent_rank_of_mixed_block_state(self):
        Gamma = gaussian.block_covariance([0.3, -0.6])
        self.assertEqual(verification.tangent_rank(Gamma, AlphaMetric.single(0.5)), 6)


if __name__ == "__main__":
    unittest.main()
