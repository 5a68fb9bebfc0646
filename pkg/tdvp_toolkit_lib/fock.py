"""Dense Fock-space representation of fermionic systems (Jordan-Wigner).

Mode m (0-based) is the m-th Kronecker factor from the left. The first basis
vector of each factor is the empty mode. Majorana operators follow
c_{2m} = a_m^+ + a_m and c_{2m+1} = -i (a_m^+ - a_m), with
a_m = Z_0 ... Z_{m-1} (X_m + i Y_m) / 2.
"""

import functools

import numpy as np
from scipy import sparse

from tdvp_toolkit_lib import config
from tdvp_toolkit_lib import misc


_PAULI_Z = sparse.csr_matrix(np.array([[1.0, 0.0], [0.0, -1.0]], dtype=np.complex128))
_LOWER = sparse.csr_matrix(np.array([[0.0, 1.0], [0.0, 0.0]], dtype=np.complex128))
_EYE2 = sparse.identity(2, dtype=np.complex128, format="csr")


def check_n_modes(n_modes):
    """Validates a mode count against the dense-size cap.

    :param n_modes: Number of fermionic modes.
    :return: The mode count as int.
    """
    if int(n_modes) != n_modes or n_modes < 1:
        raise ValueError("Number of modes must be a positive integer, got {}.".format(n_modes))
    if n_modes > config.dense_max_modes:
        raise misc.DenseCapError(
            "{} modes exceed the dense cap of {} modes.".format(n_modes, config.dense_max_modes)
        )
    return int(n_modes)


def n_modes_from_dim(dim):
    """Number of modes of a Fock space of the given dimension."""
    n_modes = int(round(np.log2(dim)))
    if 2**n_modes != dim:
        raise ValueError("Dimension {} is not a power of two.".format(dim))
    return n_modes


def _site_operator(op, site, n_modes, string):
    """Kronecker product with `op` at `site`, Z on the sites before it if `string`."""
    factors = []
    for k in range(n_modes):
        if k < site:
            factors.append(_PAULI_Z if string else _EYE2)
        elif k == site:
            factors.append(op)
        else:
            factors.append(_EYE2)
    out = factors[0]
    for f in factors[1:]:
        out = sparse.kron(out, f, format="csr")
    return sparse.csr_matrix(out)


@functools.lru_cache(maxsize=None)
def annihilation_operators(n_modes):
    """Sparse Jordan-Wigner annihilation operators.

    :param n_modes: Number of modes.
    :return: Tuple of n_modes CSR matrices a_0, ..., a_{N-1}.
    """
    n_modes = check_n_modes(n_modes)
    return tuple(_site_operator(_LOWER, m, n_modes, True) for m in range(n_modes))


@functools.lru_cache(maxsize=None)
def majorana_operators(n_modes):
    """Sparse Majorana operators (see the module docstring for the convention).

    The returned matrices are shared between callers and must not be modified.

    :param n_modes: Number of modes.
    :return: Tuple of 2*n_modes CSR matrices.
    """
    majoranas = []
    for a in annihilation_operators(n_modes):
        a_dag = sparse.csr_matrix(a.conj().T)
        majoranas.append(sparse.csr_matrix(a_dag + a))
        majoranas.append(sparse.csr_matrix(-1j * (a_dag - a)))
    return tuple(majoranas)


def build_majoranas(n_modes):
    """Dense Majorana operators.

    :param n_modes: Number of modes N (1 <= N <= config.dense_max_modes).
    :return: List of 2N dense Hermitian ndarrays of shape (2^N, 2^N).
    """
    return [c.toarray() for c in majorana_operators(n_modes)]


def number_operator(n_modes, mode):
    """Sparse occupation-number operator a_m^+ a_m."""
    a = annihilation_operators(n_modes)[mode]
    return sparse.csr_matrix(a.conj().T @ a)


def basis_state_projector(n_modes, occupied):
    """Projector onto a Fock basis state.

    :param n_modes: Number of modes.
    :param occupied: Iterable with the indices of the occupied modes.
    :return: Dense density matrix |n><n|.
    """
    n_modes = check_n_modes(n_modes)
    index = 0
    for m in occupied:
        if not 0 <= m < n_modes:
            raise ValueError("Mode index {} out of range.".format(m))
        index += 2 ** (n_modes - 1 - m)
    rho = np.zeros((2**n_modes, 2**n_modes), dtype=np.complex128)
    rho[index, index] = 1.0
    return rho


def maximally_mixed(n_modes):
    """The state I / 2^N."""
    n_modes = check_n_modes(n_modes)
    dim = 2**n_modes
    return np.eye(dim, dtype=np.complex128) / dim


def trace_product(op, rho):
    """tr[op rho] for a dense or sparse operator and a dense matrix."""
    if sparse.issparse(op):
        return complex(op.multiply(rho.T).sum())
    return complex(np.einsum("ij,ji->", op, rho))


def is_hermitian(A, atol=None):
    if atol is None:
        atol = config.hermitian_atol
    if sparse.issparse(A):
        A = A.toarray()
    scale = max(1.0, float(np.max(np.abs(A)))) if A.size else 1.0
    return bool(np.max(np.abs(A - A.conj().T), initial=0.0) <= atol * scale)


def check_density_matrix(rho, hermitian_atol=None, trace_atol=None, psd_atol=None):
    """Validates the invariants of a density matrix.

    :param rho: Square ndarray.
    :param hermitian_atol: Tolerance of the Hermiticity check.
    :param trace_atol: Tolerance of the unit-trace check.
    :param psd_atol: Lowest admissible eigenvalue is -psd_atol.
    :return: rho (as complex ndarray).
    """
    if hermitian_atol is None:
        hermitian_atol = config.hermitian_atol
    if trace_atol is None:
        trace_atol = config.trace_atol
    if psd_atol is None:
        psd_atol = config.psd_atol

    rho = np.asarray(rho, dtype=np.complex128)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError("Density matrix must be square, got shape {}.".format(rho.shape))
    herm_err = float(np.max(np.abs(rho - rho.conj().T)))
    if herm_err > hermitian_atol:
        raise ValueError("Density matrix is not Hermitian (deviation {:.3e}).".format(herm_err))
    tr = np.trace(rho)
    if abs(tr - 1.0) > trace_atol:
        raise ValueError("Density matrix trace is {} instead of 1.".format(tr))
    min_eig = float(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0])
    if min_eig < -psd_atol:
        raise ValueError("Density matrix has a negative eigenvalue {:.3e}.".format(min_eig))
    return rho


def check_tangent_operator(A, atol=None):
    """Validates a tangent operator (traceless Hermitian).

    :param A: Square ndarray.
    :param atol: Tolerance of both checks.
    :return: A.
    """
    if atol is None:
        atol = config.trace_atol
    herm_err = float(np.max(np.abs(A - A.conj().T), initial=0.0))
    if herm_err > atol:
        raise ValueError("Tangent operator is not Hermitian (deviation {:.3e}).".format(herm_err))
    if abs(np.trace(A)) > atol:
        raise ValueError("Tangent operator has trace {}.".format(np.trace(A)))
    return A


def purity(rho):
    """Purity tr[rho^2] of a dense density matrix."""
    return float(np.real(np.einsum("ij,ji->", rho, rho)))


def ground_state(H):
    """Ground state of a Hamiltonian as a rank-1 projector.

    :param H: Dense (or sparse) Hermitian matrix.
    :return: Density matrix onto the lowest eigenvector.
    """
    if sparse.issparse(H):
        H = H.toarray()
    H = np.asarray(H)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError("Hamiltonian must be square, got shape {}.".format(H.shape))
    if not is_hermitian(H):
        raise ValueError("Hamiltonian is not Hermitian.")

    energies, vecs = np.linalg.eigh(0.5 * (H + H.conj().T))
    if energies.shape[0] > 1 and energies[1] - energies[0] < config.degeneracy_atol:
        raise misc.DegenerateGroundStateError(
            "Lowest eigenvalue {:.12f} is degenerate (gap {:.3e}).".format(
                energies[0], energies[1] - energies[0]
            )
        )
    psi = vecs[:, 0]
    return np.outer(psi, psi.conj())


def hs_distance(A, B, norm=None):
    """Distance ||A - B|| between two dense operators.

    :param A: 2D ndarray.
    :param B: 2D ndarray of the same shape.
    :param norm: 'frobenius' (Hilbert-Schmidt, default) or 'spectral'.
    :return: Nonnegative float.
    """
    if norm is None:
        norm = config.default_norm
    A = np.asarray(A)
    B = np.asarray(B)
    if A.shape != B.shape:
        raise ValueError("Dimension mismatch: {} vs {}.".format(A.shape, B.shape))
    return misc.matrix_norm(A - B, norm)
