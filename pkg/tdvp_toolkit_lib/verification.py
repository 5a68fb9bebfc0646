"""Numerical checks of the metric independence of Gaussian TDVP.

On the Gaussian chart the TDVP velocity, pulled back to dGamma/dt, equals the
Gaussified covariance dynamics for every alpha metric and every convex
combination of them. The tangent space has dimension N(2N-1).
"""

import time

import numpy as np

from tdvp_toolkit_lib import gaussian
from tdvp_toolkit_lib import gaussified
from tdvp_toolkit_lib import metrics
from tdvp_toolkit_lib import misc
from tdvp_toolkit_lib import sampling
from tdvp_toolkit_lib import tdvp


logger = misc.get_logger(__name__)

DEFAULT_ALPHAS = (0.1, 0.25, 0.5, 0.75, 0.9)
DEFAULT_CONVEX = ((0.3, 0.25), (0.7, 0.75))


def _relative_deviation(A, B):
    scale = max(float(np.max(np.abs(B))), 1e-12)
    return float(np.max(np.abs(A - B))) / scale


def metric_independence_report(seed, n_modes_list=(2, 3), cases=50, alphas=DEFAULT_ALPHAS, convex=DEFAULT_CONVEX, tol=1e-6):
    """Compares Gaussian-chart TDVP with the covariance equation of motion.

    :param seed: Seed of the random states and generators.
    :param n_modes_list: Mode counts to test.
    :param cases: Number of random (state, generator) draws per mode count.
    :param alphas: Single-alpha metrics to test.
    :param convex: Terms (weight, alpha) of one convex combination (or None).
    :param tol: Admissible relative deviation.
    :return: JSON-serializable dict; "passed" tells whether all deviations
      stay below tol.
    """
    rng = sampling.get_rng(seed)
    metric_list = [metrics.AlphaMetric.single(a) for a in alphas]
    if convex:
        metric_list.append(metrics.AlphaMetric.convex(convex))

    t_start = time.time()
    per_n = []
    worst = 0.0
    worst_spread = 0.0
    for n_modes in n_modes_list:
        chart = tdvp.GaussianChart(n_modes)
        max_dev = 0.0
        max_spread = 0.0
        for _ in range(cases):
            Gamma = sampling.random_covariance(n_modes, rng)
            spec = sampling.random_spec(n_modes, rng)
            reference = gaussified.cm_equation_of_motion(Gamma, spec)

            x = chart.coordinates(Gamma)
            tangents = chart.tangents(x)
            derivs = []
            for metric in metric_list:
                sol = tdvp.tdvp_velocity(chart, x, metric, spec, tangents=tangents)
                derivs.append(chart.velocity_to_cm_derivative(sol.v))
                max_dev = max(max_dev, _relative_deviation(derivs[-1], reference))
            for d in derivs[1:]:
                max_spread = max(max_spread, _relative_deviation(d, derivs[0]))

        logger.info(
            "N={}: max relative deviation {:.3e}, spread across metrics {:.3e}".format(
                n_modes, max_dev, max_spread
            )
        )
        per_n.append(
            {
                "n_modes": int(n_modes),
                "cases": int(cases),
                "max_relative_deviation": max_dev,
                "max_metric_spread": max_spread,
            }
        )
        worst = max(worst, max_dev)
        worst_spread = max(worst_spread, max_spread)

    return {
        "seed": int(seed),
        "metrics": [str(m) for m in metric_list],
        "tolerance": tol,
        "results": per_n,
        "max_relative_deviation": worst,
        "max_metric_spread": worst_spread,
        "passed": bool(worst < tol and worst_spread < tol),
        "seconds": time.time() - t_start,
    }


def tangent_rank(Gamma, metric, rank_cutoff=1e-8):
    """Numerical rank of the Gram matrix of the Gaussian chart at Gamma."""
    n_modes = Gamma.shape[0] // 2
    chart = tdvp.GaussianChart(n_modes)
    G = tdvp.gram_matrix(chart, chart.coordinates(Gamma), metric)
    s = np.linalg.svd(G, compute_uv=False)
    return int(np.sum(s > rank_cutoff * s[0])) if s.size and s[0] > 0 else 0


def tangent_dimension_report(n_modes_list=(2, 3, 4), seed=0, alpha=0.5, rank_cutoff=1e-8):
    """Numerical rank of the Gaussian-chart Gram matrix against N(2N-1).

    :return: JSON-serializable dict with one entry per mode count; the entry
      also lists 2N(2N-1) for comparison.
    """
    rng = sampling.get_rng(seed)
    metric = metrics.AlphaMetric.single(alpha)
    entries = []
    for n_modes in n_modes_list:
        Gamma = sampling.random_covariance(n_modes, rng)
        rank = tangent_rank(Gamma, metric, rank_cutoff)
        expected = n_modes * (2 * n_modes - 1)
        entries.append(
            {
                "n_modes": int(n_modes),
                "rank": rank,
                "expected": expected,
                "alternative": 2 * n_modes * (2 * n_modes - 1),
                "passed": rank == expected,
            }
        )
        logger.info("N={}: Gram rank {} (expected {})".format(n_modes, rank, expected))
    return {"entries": entries, "passed": all(e["passed"] for e in entries)}


def full_density_residual(rho, metric, spec):
    """TDVP residual on the chart of all density matrices (zero up to round-off)."""
    chart = tdvp.FullDensityChart(rho.shape[0])
    return tdvp.tdvp_velocity(chart, chart.coordinates(rho), metric, spec).residual


def inverse_metric_span_report(Gamma, metric):
    """Checks that the traceless operators Omega^-1(i c_k c_l - Gamma_kl I)
    span the Gaussian tangent space.

    :return: Dict with the rank of the basis, of the chart tangents and of
      their union, and the largest trace of the raw basis minus Gamma_kl.
    """
    n_modes = Gamma.shape[0] // 2
    chart = tdvp.GaussianChart(n_modes)
    rho = gaussian.dense_from_covariance(Gamma)
    x = chart.coordinates(Gamma)
    tangents = chart.tangents(x)
    basis = gaussian.inverse_metric_basis(rho, Gamma, metric, traceless=True)
    raw = gaussian.inverse_metric_basis(rho, Gamma, metric, traceless=False)

    def rank(ops):
        M = np.array([np.concatenate([o.real.ravel(), o.imag.ravel()]) for o in ops])
        s = np.linalg.svd(M, compute_uv=False)
        return int(np.sum(s > 1e-8 * s[0]))

    rows, cols = chart.rows, chart.cols
    trace_err = max(
        abs(np.trace(B) - Gamma[k, l]) for B, k, l in zip(raw, rows, cols)
    )
    return {
        "basis_rank": rank(basis),
        "tangent_rank": rank(tangents),
        "joint_rank": rank(basis + tangents),
        "raw_trace_error": float(trace_err),
    }
