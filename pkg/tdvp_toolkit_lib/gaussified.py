"""Covariance-matrix evolution of the Gaussified Lindblad dynamics.

For a Gaussian state rho_G(Gamma) the covariance matrix evolves as

  dGamma_kl/dt = i tr(c_k c_l L(rho_G)) = < i L^+(c_k c_l) >_Gamma,

with the Heisenberg-picture generator
L^+(Q) = i[H, Q] + sum_x kappa_x (j_x^+ Q j_x - 1/2 {j_x^+ j_x, Q}).
The polynomials i L^+(c_k c_l) are compiled once per spec and evaluated with
Wick's theorem, one vectorized Pfaffian batch per monomial degree.
"""

from dataclasses import dataclass, field
from typing import List

import numpy as np

from tdvp_toolkit_lib import config
from tdvp_toolkit_lib import fock
from tdvp_toolkit_lib import gaussian
from tdvp_toolkit_lib import integrate
from tdvp_toolkit_lib import misc
from tdvp_toolkit_lib import polynomial


logger = misc.get_logger(__name__)

MAX_HAMILTONIAN_DEGREE = 4
MAX_JUMP_DEGREE = 2


def heisenberg_generator(spec, Q):
    """L^+(Q) for a polynomial LindbladSpec (constant terms of H drop out)."""
    H = spec.hamiltonian.without_constant()
    out = 1j * polynomial.commutator(H, Q)
    for jump in spec.jumps:
        if jump.rate == 0:
            continue
        j = jump.operator
        j_dag = j.adjoint()
        out = out + jump.rate * (
            j_dag * Q * j - 0.5 * polynomial.anticommutator(j_dag * j, Q)
        )
    return out


class MomentEquations:
    """dGamma/dt as a fixed set of Wick monomials per covariance entry.

    :param spec: lindblad.LindbladSpec with PolynomialOperator entries,
      Hamiltonian degree <= 4 and jump degree <= 2.
    """

    def __init__(self, spec):
        if not spec.is_polynomial():
            raise ValueError("Covariance dynamics need a spec of PolynomialOperators.")
        if spec.hamiltonian.degree() > MAX_HAMILTONIAN_DEGREE:
            raise ValueError(
                "Hamiltonian degree {} exceeds {}.".format(
                    spec.hamiltonian.degree(), MAX_HAMILTONIAN_DEGREE
                )
            )
        for jump in spec.jumps:
            if jump.operator.degree() > MAX_JUMP_DEGREE:
                raise ValueError(
                    "Jump operator degree {} exceeds {}.".format(
                        jump.operator.degree(), MAX_JUMP_DEGREE
                    )
                )
        if not spec.hamiltonian.is_even():
            logger.warning("Odd Hamiltonian terms have no effect on the covariance dynamics.")

        self.n_modes = spec.n_modes
        self.dim = 2 * spec.n_modes
        self.rows, self.cols = misc.upper_indices(self.dim)
        self.n_pairs = self.rows.shape[0]

        groups = {}
        for t, (k, l) in enumerate(zip(self.rows, self.cols)):
            Q = polynomial.PolynomialOperator(self.n_modes, {(int(k), int(l)): 1.0})
            P = 1j * heisenberg_generator(spec, Q)
            for idx, coef in P.items():
                # Odd monomials have vanishing Gaussian expectation.
                if len(idx) % 2 == 1:
                    continue
                g = groups.setdefault(len(idx), ([], [], []))
                g[0].append(idx)
                g[1].append(coef)
                g[2].append(t)

        self.groups = {}
        for d in sorted(groups):
            idxs, coefs, targets = groups[d]
            self.groups[d] = (
                np.array(idxs, dtype=np.int64).reshape(len(idxs), d),
                np.array(coefs, dtype=np.complex128),
                np.array(targets, dtype=np.int64),
            )
        logger.info(
            "Compiled moment equations: {} monomials over degrees {}".format(
                sum(len(g[1]) for g in self.groups.values()), sorted(self.groups)
            )
        )

    def upper(self, Gamma):
        """dGamma/dt on the strictly upper triangle (row-major)."""
        out = np.zeros(self.n_pairs)
        for d, (idxs, coefs, targets) in self.groups.items():
            vals = coefs * gaussian.batched_wick_expectations(Gamma, idxs)
            out += np.bincount(targets, weights=np.real(vals), minlength=self.n_pairs)
        return out

    def __call__(self, Gamma):
        return misc.antisymmetric_from_upper(self.upper(Gamma), self.dim)


def moment_equations(spec):
    """MomentEquations of a spec (compiled once and kept on the spec)."""
    compiled = getattr(spec, "_moment_equations", None)
    if compiled is None:
        compiled = MomentEquations(spec)
        spec._moment_equations = compiled
    return compiled


def cm_equation_of_motion(Gamma, spec):
    """dGamma/dt of the Gaussified dynamics.

    :param Gamma: Physical covariance matrix.
    :param spec: Polynomial lindblad.LindbladSpec.
    :return: Real antisymmetric 2N x 2N ndarray.
    """
    Gamma = gaussian.check_covariance_matrix(Gamma)
    if Gamma.shape[0] != 2 * spec.n_modes:
        raise ValueError(
            "Dimension mismatch: Gamma {} vs {} modes.".format(Gamma.shape, spec.n_modes)
        )
    return moment_equations(spec)(Gamma)


def integrate_gaussified(
    Gamma0,
    spec,
    t_final=None,
    dt=None,
    sample_interval=None,
    on_sample=None,
    keep_states=True,
):
    """Integrates the covariance matrix with fixed-step RK4 on its upper triangle.

    After every step, eigenvalues of i*Gamma beyond [-1, 1] are clipped;
    excursions above config.physicality_clip are logged as warnings and
    excursions above config.physicality_abort abort the run.

    :param Gamma0: Initial covariance matrix.
    :param spec: Polynomial lindblad.LindbladSpec.
    :param t_final: Default: config.default_t_final.
    :param dt: Default: config.default_dt.
    :param sample_interval: Default: config.default_sample_interval.
    :param on_sample: Optional callable (t, Gamma) invoked at every sample.
    :param keep_states: Whether the trajectory stores the covariance matrices.
    :return: integrate.Trajectory of covariance matrices; info["clip_events"]
      counts the clipped steps and info["max_excursion"] the largest excursion.
    """
    if t_final is None:
        t_final = config.default_t_final
    if dt is None:
        dt = config.default_dt
    if sample_interval is None:
        sample_interval = config.default_sample_interval

    Gamma0 = gaussian.check_covariance_matrix(Gamma0)
    equations = moment_equations(spec)
    if Gamma0.shape[0] != equations.dim:
        raise ValueError(
            "Dimension mismatch: Gamma {} vs {} modes.".format(Gamma0.shape, spec.n_modes)
        )
    dim = equations.dim
    rows, cols = equations.rows, equations.cols
    stats = {"clip_events": 0, "max_excursion": 0.0}

    def rhs(t, x):
        return equations.upper(misc.antisymmetric_from_upper(x, dim))

    def after_step(t, x):
        Gamma = misc.antisymmetric_from_upper(x, dim)
        excursion = gaussian.physicality_excursion(Gamma)
        if excursion <= 0:
            return x
        if excursion > config.physicality_abort:
            raise misc.NumericalAbort(
                "gaussified: eigenvalue of i*Gamma exceeds 1 by {:.3e} at t={:.6f}".format(
                    excursion, t
                )
            )
        if excursion > config.physicality_clip:
            logger.warning(
                "gaussified: clipping excursion {:.3e} at t={:.6f}".format(excursion, t)
            )
        stats["clip_events"] += 1
        stats["max_excursion"] = max(stats["max_excursion"], excursion)
        Gamma, _ = gaussian.clip_to_physical(Gamma)
        return Gamma[rows, cols]

    def sample(t, x):
        if on_sample is not None:
            on_sample(t, misc.antisymmetric_from_upper(x, dim))

    traj = integrate.integrate_fixed_step(
        rhs,
        Gamma0[rows, cols],
        t_final,
        dt,
        sample_interval,
        after_step=after_step,
        on_sample=sample,
        keep_states=keep_states,
        name="gaussified",
    )
    traj.states = [misc.antisymmetric_from_upper(x, dim) for x in traj.states]
    traj.info.update(stats)
    return traj


@dataclass
class ComparisonSeries:
    """Distances between a Gaussified and an exact trajectory."""

    times: List[float] = field(default_factory=list)
    d_gamma: List[float] = field(default_factory=list)
    d_rho: List[float] = field(default_factory=list)


def compare_states(rho, Gamma, norm=None):
    """Distances of one sample.

    :param rho: Exact density matrix.
    :param Gamma: Covariance matrix of the Gaussified state.
    :param norm: 'frobenius' (default) or 'spectral'.
    :return: Tuple (dGamma, drho) = (||Gamma - Gamma(rho)||, ||rho_G(Gamma) - rho||).
    """
    if norm is None:
        norm = config.default_norm
    d_gamma = misc.matrix_norm(Gamma - gaussian.covariance_from_dense(rho), norm)
    d_rho = fock.hs_distance(gaussian.dense_from_covariance(Gamma), rho, norm)
    return d_gamma, d_rho


def compare_trajectories(exact, gaussified, norm=None, time_atol=1e-9):
    """Time series of dGamma and drho between two sampled trajectories.

    :param exact: integrate.Trajectory of density matrices.
    :param gaussified: integrate.Trajectory of covariance matrices.
    :param norm: 'frobenius' (default) or 'spectral'.
    :param time_atol: Tolerance of the sample-time match.
    :return: ComparisonSeries.
    """
    if len(exact.times) != len(gaussified.times) or not np.allclose(
        exact.times, gaussified.times, rtol=0.0, atol=time_atol
    ):
        raise ValueError("Trajectories are sampled at different times.")
    if len(exact.states) != len(exact.times) or len(gaussified.states) != len(gaussified.times):
        raise ValueError("Both trajectories must keep their states.")

    series = ComparisonSeries()
    for t, rho, Gamma in zip(exact.times, exact.states, gaussified.states):
        d_gamma, d_rho = compare_states(rho, Gamma, norm)
        series.times.append(t)
        series.d_gamma.append(d_gamma)
        series.d_rho.append(d_rho)
    return series
