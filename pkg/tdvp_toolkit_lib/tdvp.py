"""Time-dependent variational principle for mixed states.

Given a chart x -> rho(x), a monotone metric Omega and a Lindblad generator L,
the locally optimal velocity solves G v = l with

  G_jk = <d_j rho, Omega_rho(d_k rho)>,   l_j = <d_j rho, Omega_rho(L(rho))>,

which minimizes M(A - L(rho), A - L(rho)) over A = v^j d_j rho.
"""

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from tdvp_toolkit_lib import config
from tdvp_toolkit_lib import fock
from tdvp_toolkit_lib import gaussian
from tdvp_toolkit_lib import integrate
from tdvp_toolkit_lib import lindblad
from tdvp_toolkit_lib import metrics
from tdvp_toolkit_lib import misc


logger = misc.get_logger(__name__)


class ManifoldChart:
    """A parametrization x -> rho(x) of a variational manifold.

    Subclasses implement state(x) and may override tangent(x, j) with an
    analytic expression; the default is a central finite difference.
    """

    param_dim = 0

    def state(self, x):
        raise NotImplementedError

    def tangent(self, x, j):
        """Tangent operator d rho / d x_j (traceless Hermitian)."""
        h = config.fd_step
        x_plus = np.array(x, dtype=np.float64, copy=True)
        x_minus = np.array(x, dtype=np.float64, copy=True)
        x_plus[j] += h
        x_minus[j] -= h
        A = (self.state(x_plus) - self.state(x_minus)) / (2.0 * h)
        A = 0.5 * (A + A.conj().T)
        return A - np.trace(A) / A.shape[0] * np.eye(A.shape[0])

    def tangents(self, x) -> List[np.ndarray]:
        return [self.tangent(x, j) for j in range(self.param_dim)]


def gell_mann_basis(n):
    """Generalized Gell-Mann matrices: n^2 - 1 traceless Hermitian matrices
    with tr(B_i B_j) = 2 delta_ij."""
    basis = []
    for j in range(n):
        for k in range(j + 1, n):
            B = np.zeros((n, n), dtype=np.complex128)
            B[j, k] = B[k, j] = 1.0
            basis.append(B)
            B = np.zeros((n, n), dtype=np.complex128)
            B[j, k] = -1j
            B[k, j] = 1j
            basis.append(B)
    for l in range(1, n):
        B = np.zeros((n, n), dtype=np.complex128)
        B[np.arange(l), np.arange(l)] = 1.0
        B[l, l] = -float(l)
        basis.append(np.sqrt(2.0 / (l * (l + 1))) * B)
    return basis


class FullDensityChart(ManifoldChart):
    """All density matrices of dimension n: rho(x) = I/n + (1/2) sum_j x_j B_j."""

    def __init__(self, n):
        if n < 2:
            raise ValueError("Dimension must be at least 2, got {}.".format(n))
        self.n = n
        self.basis = gell_mann_basis(n)
        self.param_dim = len(self.basis)

    def state(self, x):
        rho = np.eye(self.n, dtype=np.complex128) / self.n
        for xj, B in zip(x, self.basis):
            rho = rho + 0.5 * xj * B
        return rho

    def tangent(self, x, j):
        return 0.5 * self.basis[j]

    def coordinates(self, rho):
        return np.array([np.real(np.trace(rho @ B)) for B in self.basis])


class GaussianChart(ManifoldChart):
    """Fermionic Gaussian states parametrized by the upper triangle of Gamma.

    :param n_modes: Number of modes N; the chart has N(2N-1) parameters.
    :param analytic: Whether to use the exact tangents (default) or finite
      differences.
    """

    def __init__(self, n_modes, analytic=True):
        self.n_modes = fock.check_n_modes(n_modes)
        self.analytic = analytic
        self.rows, self.cols = misc.upper_indices(2 * n_modes)
        self.param_dim = self.rows.shape[0]

    def covariance(self, x):
        return misc.antisymmetric_from_upper(np.asarray(x, dtype=np.float64), 2 * self.n_modes)

    def coordinates(self, Gamma):
        return np.asarray(Gamma, dtype=np.float64)[self.rows, self.cols]

    def state(self, x):
        return gaussian.dense_from_covariance(self.covariance(x))

    def tangent(self, x, j):
        if not self.analytic:
            return super().tangent(x, j)
        return gaussian.gaussian_tangent(self.covariance(x), int(self.rows[j]), int(self.cols[j]))

    def velocity_to_cm_derivative(self, v):
        """dGamma/dt induced by a chart velocity."""
        return misc.antisymmetric_from_upper(np.asarray(v, dtype=np.float64), 2 * self.n_modes)


@dataclass
class TdvpSolution:
    v: np.ndarray
    gram: np.ndarray
    force: np.ndarray
    residual: float
    # Set when G was singular and the pseudo-inverse was used.
    singular: bool = False
    condition: float = 1.0


def _omega_at(chart, x, metric):
    rho = chart.state(x)
    return rho, metrics.Omega(rho, metric)


def gram_matrix(chart, x, metric, omega: Optional[metrics.Omega] = None, tangents=None):
    """Pullback metric G_jk = <d_j rho, Omega_rho(d_k rho)>.

    :param chart: ManifoldChart.
    :param x: Parameter vector.
    :param metric: metrics.AlphaMetric.
    :return: Real symmetric param_dim x param_dim ndarray.
    """
    if omega is None:
        _, omega = _omega_at(chart, x, metric)
    if tangents is None:
        tangents = chart.tangents(x)
    if len(tangents) == 0:
        return np.zeros((0, 0))
    G = np.real(omega.gram(tangents))
    return 0.5 * (G + G.T)


def force_vector(chart, x, metric, spec, omega=None, tangents=None, generator_value=None):
    """Force l_j = <d_j rho, Omega_rho(L(rho))>.

    :param chart: ManifoldChart.
    :param x: Parameter vector.
    :param metric: metrics.AlphaMetric.
    :param spec: lindblad.LindbladSpec.
    :return: Real ndarray of length param_dim.
    """
    if omega is None:
        _, omega = _omega_at(chart, x, metric)
    if tangents is None:
        tangents = chart.tangents(x)
    if generator_value is None:
        generator_value = lindblad.lindblad_rhs(spec, omega.rho)
    return np.array([np.real(omega.form(A, generator_value)) for A in tangents])


def tdvp_velocity(chart, x, metric, spec, tangents=None) -> TdvpSolution:
    """Locally optimal chart velocity v = G^-1 l.

    A singular G (relative singular-value cutoff config.pinv_rcond) is handled
    with the minimum-norm pseudo-inverse solution, flagged in the result.

    :param chart: ManifoldChart.
    :param x: Parameter vector.
    :param metric: metrics.AlphaMetric.
    :param spec: lindblad.LindbladSpec.
    :param tangents: Precomputed chart tangents at x (metric independent).
    :return: TdvpSolution.
    """
    rho, omega = _omega_at(chart, x, metric)
    if tangents is None:
        tangents = chart.tangents(x)
    L = fock.check_tangent_operator(lindblad.lindblad_rhs(spec, rho), atol=config.trace_drift_atol)
    G = gram_matrix(chart, x, metric, omega=omega, tangents=tangents)
    l = force_vector(chart, x, metric, spec, omega=omega, tangents=tangents, generator_value=L)
    if not (np.all(np.isfinite(G)) and np.all(np.isfinite(l))):
        raise ValueError("Non-finite Gram matrix or force vector.")

    s = np.linalg.svd(G, compute_uv=False) if G.size else np.zeros(0)
    s_max = float(s[0]) if s.size else 0.0
    s_min = float(s[-1]) if s.size else 0.0
    condition = s_max / s_min if s_min > 0 else np.inf
    singular = s.size > 0 and s_min <= config.pinv_rcond * s_max
    if singular:
        logger.info("Singular Gram matrix (condition {:.3e}), using pseudo-inverse".format(condition))
        v = np.linalg.pinv(G, rcond=config.pinv_rcond, hermitian=True) @ l
    elif G.size:
        v = np.linalg.solve(G, l)
    else:
        v = np.zeros(0)

    A = np.zeros_like(rho)
    for vj, T in zip(v, tangents):
        A = A + vj * T
    residual = float(np.real(omega.form(A - L, A - L)))
    return TdvpSolution(v, G, l, max(residual, 0.0), bool(singular), float(condition))


def integrate_tdvp(
    chart,
    x0,
    metric,
    spec,
    t_final=None,
    dt=None,
    sample_interval=None,
    on_sample=None,
    keep_states=True,
    allow_singular=False,
):
    """Integrates the projected flow dx/dt = v(x) with fixed-step RK4.

    :param chart: ManifoldChart.
    :param x0: Initial parameters.
    :param metric: metrics.AlphaMetric.
    :param spec: lindblad.LindbladSpec.
    :param t_final: Default: config.default_t_final.
    :param dt: Default: config.default_dt.
    :param sample_interval: Default: config.default_sample_interval.
    :param on_sample: Optional callable (t, x) invoked at every sample.
    :param keep_states: Whether the trajectory stores the parameter vectors.
    :param allow_singular: Whether to continue past Gram condition numbers
      above config.gram_max_condition (pseudo-inverse solution).
    :return: integrate.Trajectory of parameter vectors.
    """
    if t_final is None:
        t_final = config.default_t_final
    if dt is None:
        dt = config.default_dt
    if sample_interval is None:
        sample_interval = config.default_sample_interval

    def rhs(t, x):
        try:
            sol = tdvp_velocity(chart, x, metric, spec)
        except ValueError as e:
            raise misc.NumericalAbort("tdvp: {} at t={:.6f}".format(e, t))
        if sol.condition > config.gram_max_condition and not allow_singular:
            raise misc.NumericalAbort(
                "tdvp: Gram condition number {:.3e} exceeds {:.1e} at t={:.6f}".format(
                    sol.condition, config.gram_max_condition, t
                )
            )
        return sol.v

    def sample(t, x):
        try:
            fock.check_density_matrix(
                chart.state(x), hermitian_atol=1e-7, trace_atol=1e-7, psd_atol=1e-7
            )
        except ValueError as e:
            raise misc.NumericalAbort("tdvp: invalid state at t={:.6f}: {}".format(t, e))
        if on_sample is not None:
            on_sample(t, x)

    return integrate.integrate_fixed_step(
        rhs,
        np.asarray(x0, dtype=np.float64),
        t_final,
        dt,
        sample_interval,
        on_sample=sample,
        keep_states=keep_states,
        name="tdvp",
    )
