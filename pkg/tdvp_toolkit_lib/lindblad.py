"""Lindblad generators and the exact (dense) integrator."""

from dataclasses import dataclass, field
from typing import Any, List

import numpy as np
from scipy import sparse

from tdvp_toolkit_lib import config
from tdvp_toolkit_lib import fock
from tdvp_toolkit_lib import integrate
from tdvp_toolkit_lib import misc
from tdvp_toolkit_lib.polynomial import PolynomialOperator


logger = misc.get_logger(__name__)


def _operator_matrix(op):
    """Sparse CSR matrix of a PolynomialOperator, dense ndarray or sparse matrix."""
    if isinstance(op, PolynomialOperator):
        return op.to_sparse()
    if sparse.issparse(op):
        return sparse.csr_matrix(op, dtype=np.complex128)
    op = np.asarray(op, dtype=np.complex128)
    if op.ndim != 2 or op.shape[0] != op.shape[1]:
        raise ValueError("Operator must be a square matrix, got shape {}.".format(op.shape))
    return sparse.csr_matrix(op)


def _operator_dim(op):
    if isinstance(op, PolynomialOperator):
        return 2**op.n_modes
    return op.shape[0]


@dataclass
class Jump:
    """A jump operator j with its rate kappa."""

    operator: Any
    rate: float = 1.0


@dataclass
class LindbladSpec:
    """Generator L(rho) = -i[H, rho] + sum_x kappa_x (j_x rho j_x^+ - 1/2 {j_x^+ j_x, rho}).

    The Hamiltonian and the jump operators are PolynomialOperators (needed by
    the covariance-matrix engine) or dense/sparse matrices (oracle only).
    """

    hamiltonian: Any
    jumps: List[Jump] = field(default_factory=list)

    def __post_init__(self):
        self.jumps = [j if isinstance(j, Jump) else Jump(*j) for j in self.jumps]
        dims = {_operator_dim(self.hamiltonian)} | {_operator_dim(j.operator) for j in self.jumps}
        if len(dims) != 1:
            raise ValueError("Operators of the spec have different dimensions: {}.".format(dims))
        self.dim = dims.pop()
        self.n_modes = fock.n_modes_from_dim(self.dim)

        for j in self.jumps:
            if not (np.isfinite(j.rate) and j.rate >= 0):
                raise ValueError("Jump rates must be nonnegative, got {}.".format(j.rate))
        if isinstance(self.hamiltonian, PolynomialOperator):
            hermitian = self.hamiltonian.is_hermitian()
        else:
            hermitian = fock.is_hermitian(self.hamiltonian)
        if not hermitian:
            raise ValueError("Hamiltonian is not Hermitian.")
        self._generator = None

    def is_polynomial(self):
        return isinstance(self.hamiltonian, PolynomialOperator) and all(
            isinstance(j.operator, PolynomialOperator) for j in self.jumps
        )

    def hamiltonian_matrix(self):
        return _operator_matrix(self.hamiltonian)

    def generator(self):
        """DenseGenerator of this spec (built once)."""
        if self._generator is None:
            self._generator = DenseGenerator(self)
        return self._generator


class DenseGenerator:
    """Applies a LindbladSpec to dense matrices of the 2^N-dimensional Fock space.

    Uses H_eff = H - (i/2) sum kappa j^+ j, so that
    L(rho) = -i (H_eff rho - rho H_eff^+) + sum kappa j rho j^+.
    """

    def __init__(self, spec: LindbladSpec):
        fock.check_n_modes(spec.n_modes)
        self.dim = spec.dim
        self.hamiltonian = spec.hamiltonian_matrix()
        self.jumps = []
        h_eff = self.hamiltonian.astype(np.complex128)
        for j in spec.jumps:
            if j.rate == 0:
                continue
            J = _operator_matrix(j.operator)
            self.jumps.append((float(j.rate), J))
            h_eff = h_eff - 0.5j * j.rate * sparse.csr_matrix(J.conj().T @ J)
        self.h_eff = sparse.csr_matrix(h_eff)

    def __call__(self, rho):
        if rho.shape != (self.dim, self.dim):
            raise ValueError(
                "Dimension mismatch: generator acts on {}, got {}.".format(self.dim, rho.shape)
            )
        A = self.h_eff @ rho
        # rho H_eff^+ = (H_eff rho^+)^+.
        B = (self.h_eff @ rho.conj().T).conj().T
        out = -1j * (A - B)
        for rate, J in self.jumps:
            # j rho j^+ = (j (j rho)^+)^+.
            out = out + rate * (J @ (J @ rho).conj().T).conj().T
        return np.asarray(out)


def lindblad_rhs(spec: LindbladSpec, rho):
    """Evaluates the generator L(rho).

    :param spec: LindbladSpec.
    :param rho: Dense density matrix of dimension spec.dim.
    :return: Dense traceless Hermitian ndarray.
    """
    rho = np.asarray(rho, dtype=np.complex128)
    if rho.shape != (spec.dim, spec.dim):
        raise ValueError(
            "Dimension mismatch: spec acts on dimension {}, got {}.".format(spec.dim, rho.shape)
        )
    return spec.generator()(rho)


def integrate_exact(
    spec: LindbladSpec,
    rho0,
    t_final=None,
    dt=None,
    sample_interval=None,
    on_sample=None,
    keep_states=True,
):
    """Integrates the Lindblad equation with fixed-step RK4 on dense matrices.

    :param spec: LindbladSpec.
    :param rho0: Initial density matrix.
    :param t_final: Final time (units 1/kappa). Default: config.default_t_final.
    :param dt: Time step. Default: config.default_dt.
    :param sample_interval: Default: config.default_sample_interval.
    :param on_sample: Optional callable (t, rho) invoked at every sample.
    :param keep_states: Whether the returned trajectory stores the states.
    :return: integrate.Trajectory of density matrices.
    """
    if t_final is None:
        t_final = config.default_t_final
    if dt is None:
        dt = config.default_dt
    if sample_interval is None:
        sample_interval = config.default_sample_interval

    rho0 = fock.check_density_matrix(rho0)
    if rho0.shape != (spec.dim, spec.dim):
        raise ValueError(
            "Dimension mismatch: spec acts on dimension {}, got {}.".format(spec.dim, rho0.shape)
        )
    generator = spec.generator()

    def rhs(t, rho):
        return generator(rho)

    def after_step(t, rho):
        rho = 0.5 * (rho + rho.conj().T)
        drift = abs(np.trace(rho) - 1.0)
        if drift > config.trace_drift_atol:
            raise misc.NumericalAbort(
                "exact: trace drift {:.3e} at t={:.6f} (step too large?)".format(drift, t)
            )
        return rho

    def sample(t, rho):
        try:
            fock.check_density_matrix(rho)
        except ValueError as e:
            raise misc.NumericalAbort("exact: invalid state at t={:.6f}: {}".format(t, e))
        if on_sample is not None:
            on_sample(t, rho)

    return integrate.integrate_fixed_step(
        rhs,
        rho0,
        t_final,
        dt,
        sample_interval,
        after_step=after_step,
        on_sample=sample,
        keep_states=keep_states,
        name="exact",
    )
