"""Fermionic Gaussian states in the covariance-matrix representation.

Gamma_kl = (i/2) tr([c_k, c_l] rho) is real antisymmetric. A Gaussian state is
expanded in Majorana monomials as

  rho = 2^-N sum_S i^(|S|/2) Pf(Gamma_S) c_S,

so that tr(rho c_S) = (-i)^(|S|/2) Pf(Gamma_S) for strictly increasing S.
"""

from dataclasses import dataclass
from typing import List

import numpy as np
from scipy import linalg
from scipy import sparse

from tdvp_toolkit_lib import config
from tdvp_toolkit_lib import fock
from tdvp_toolkit_lib import metrics
from tdvp_toolkit_lib import misc
from tdvp_toolkit_lib import polynomial


logger = misc.get_logger(__name__)

PFAFFIAN_METHODS = ("parlett_reid", "householder")


def _check_antisymmetric(A, atol=1e-12):
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("Expected a square matrix, got shape {}.".format(A.shape))
    if A.shape[0] % 2 == 1:
        raise ValueError("Pfaffian of an odd-dimensional matrix ({}).".format(A.shape[0]))
    scale = max(1.0, float(np.max(np.abs(A)))) if A.size else 1.0
    if A.size and np.max(np.abs(A + A.T)) > atol * scale:
        raise ValueError("Matrix is not antisymmetric.")
    return A


def _pfaffian_parlett_reid(A):
    """Pfaffian via skew-symmetric LTL^T elimination with partial pivoting."""
    A = np.array(A, dtype=np.result_type(A.dtype, np.float64), copy=True)
    n = A.shape[0]
    pf = 1.0
    for k in range(0, n - 1, 2):
        # Pivot: largest entry of column k below the diagonal.
        kp = k + 1 + int(np.abs(A[k + 1 :, k]).argmax())
        if kp != k + 1:
            temp = A[k + 1, k:].copy()
            A[k + 1, k:] = A[kp, k:]
            A[kp, k:] = temp
            temp = A[k:, k + 1].copy()
            A[k:, k + 1] = A[k:, kp]
            A[k:, kp] = temp
            pf *= -1

        if A[k + 1, k] == 0.0:
            return 0.0 * pf

        tau = A[k, k + 2 :] / A[k, k + 1]
        pf *= A[k, k + 1]
        if k + 2 < n:
            A[k + 2 :, k + 2 :] += np.outer(tau, A[k + 2 :, k + 1])
            A[k + 2 :, k + 2 :] -= np.outer(A[k + 2 :, k + 1], tau)
    return pf


def _householder_real(x):
    """Householder vector v, factor tau and alpha with (I - tau v v^T) x = alpha e_0."""
    sigma = np.dot(x[1:], x[1:])
    if sigma == 0:
        return np.zeros(x.shape[0]), 0.0, x[0]
    norm_x = np.sqrt(x[0] ** 2 + sigma)
    v = x.copy()
    if x[0] <= 0:
        v[0] -= norm_x
        alpha = norm_x
    else:
        v[0] += norm_x
        alpha = -norm_x
    v = v / np.linalg.norm(v)
    return v, 2.0, alpha


def _pfaffian_householder(A):
    """Pfaffian via Householder tridiagonalization (real matrices)."""
    if np.iscomplexobj(A):
        raise ValueError("The Householder Pfaffian supports real matrices only.")
    A = np.array(A, dtype=np.float64, copy=True)
    n = A.shape[0]
    if n == 0:
        return 1.0
    pf = 1.0
    for i in range(n - 2):
        v, tau, alpha = _householder_real(A[i + 1 :, i])
        A[i + 1, i] = alpha
        A[i, i + 1] = -alpha
        A[i + 2 :, i] = 0
        A[i, i + 2 :] = 0

        w = tau * np.dot(A[i + 1 :, i + 1 :], v)
        A[i + 1 :, i + 1 :] += np.outer(v, w) - np.outer(w, v)

        # A Householder reflection has determinant -1.
        if tau != 0:
            pf *= 1 - tau
        if i % 2 == 0:
            pf *= -alpha
    pf *= A[n - 2, n - 1]
    return pf


def pfaffian(A, method="parlett_reid"):
    """Pfaffian of an antisymmetric matrix (Pf(A)^2 = det(A)).

    :param A: Real (or complex) antisymmetric 2m x 2m ndarray.
    :param method: 'parlett_reid' (pivoted elimination, default) or
      'householder' (tridiagonalization, real input only).
    :return: The Pfaffian (float for real input).
    """
    A = _check_antisymmetric(A)
    if A.shape[0] == 0:
        return 1.0
    if method == "parlett_reid":
        return _pfaffian_parlett_reid(A)
    elif method == "householder":
        return _pfaffian_householder(A)
    else:
        raise ValueError("Unknown Pfaffian method: {}".format(method))


def batched_pfaffian(A):
    """Pfaffians of a stack of antisymmetric matrices.

    Sizes up to 8 x 8 use the expansion along the first row, vectorized over
    the stack; larger sizes fall back to pfaffian() per matrix.

    :param A: ndarray of shape (M, 2m, 2m).
    :return: ndarray of shape (M,).
    """
    A = np.asarray(A)
    n = A.shape[-1]
    if n % 2 == 1:
        raise ValueError("Pfaffian of an odd-dimensional matrix ({}).".format(n))
    if n == 0:
        return np.ones(A.shape[0], dtype=A.dtype)
    if n == 2:
        return A[:, 0, 1]
    if n == 4:
        return (
            A[:, 0, 1] * A[:, 2, 3] - A[:, 0, 2] * A[:, 1, 3] + A[:, 0, 3] * A[:, 1, 2]
        )
    if n <= 8:
        out = np.zeros(A.shape[0], dtype=A.dtype)
        for j in range(1, n):
            rest = [r for r in range(1, n) if r != j]
            sub = A[:, rest][:, :, rest]
            sign = 1.0 if j % 2 == 1 else -1.0
            out = out + sign * A[:, 0, j] * batched_pfaffian(sub)
        return out
    return np.array([pfaffian(a) for a in A])


def batched_wick_expectations(Gamma, index_array):
    """Gaussian expectations tr(rho c_{j1} ... c_{j2p}) of many monomials.

    :param Gamma: Covariance matrix (2N x 2N).
    :param index_array: Int ndarray of shape (M, d) with strictly increasing
      rows (canonical monomials of equal degree d).
    :return: Complex ndarray of shape (M,).
    """
    index_array = np.asarray(index_array, dtype=np.int64)
    if index_array.ndim != 2:
        raise ValueError("Index array must be 2D, got shape {}.".format(index_array.shape))
    M, d = index_array.shape
    if d % 2 == 1:
        return np.zeros(M, dtype=np.complex128)
    if d == 0:
        return np.ones(M, dtype=np.complex128)
    sub = Gamma[index_array[:, :, None], index_array[:, None, :]]
    return ((-1j) ** (d // 2)) * batched_pfaffian(sub).astype(np.complex128)


def wick_expectation(Gamma, indices):
    """Gaussian expectation tr(rho_G c_{j1} ... c_{jk}) via Wick's theorem.

    :param Gamma: Covariance matrix (2N x 2N).
    :param indices: Sequence of Majorana indices; repeats and arbitrary order
      are reduced to canonical form first.
    :return: Complex expectation value (exactly 0 for odd monomials).
    """
    dim = Gamma.shape[0]
    indices = tuple(int(k) for k in indices)
    for k in indices:
        if not 0 <= k < dim:
            raise ValueError("Majorana index {} out of range for dimension {}.".format(k, dim))
    sign, idx = polynomial.reduce_indices(indices)
    if len(idx) % 2 == 1:
        return 0j
    if len(idx) == 0:
        return complex(sign)
    sub = Gamma[np.ix_(idx, idx)]
    return complex(sign * (-1j) ** (len(idx) // 2) * pfaffian(sub))


def polynomial_expectation(Gamma, poly):
    """Gaussian expectation of a PolynomialOperator.

    :param Gamma: Covariance matrix of poly.n_modes modes.
    :param poly: PolynomialOperator.
    :return: Complex expectation value.
    """
    if Gamma.shape[0] != 2 * poly.n_modes:
        raise ValueError(
            "Dimension mismatch: Gamma {} vs {} modes.".format(Gamma.shape, poly.n_modes)
        )
    by_degree = {}
    for idx, coef in poly.items():
        by_degree.setdefault(len(idx), ([], []))
        by_degree[len(idx)][0].append(idx)
        by_degree[len(idx)][1].append(coef)
    total = 0j
    for d, (idxs, coefs) in by_degree.items():
        vals = batched_wick_expectations(Gamma, np.array(idxs, dtype=np.int64).reshape(len(idxs), d))
        total += complex(np.dot(np.array(coefs), vals))
    return total


def physicality_excursion(Gamma):
    """max |eigenvalue of i Gamma| - 1 (<= 0 for physical covariance matrices)."""
    if Gamma.shape[0] == 0:
        return -1.0
    w = np.linalg.eigvalsh(1j * Gamma)
    return float(np.max(np.abs(w)) - 1.0)


def check_covariance_matrix(Gamma, atol=1e-9):
    """Validates a covariance matrix.

    :param Gamma: Real antisymmetric 2N x 2N ndarray.
    :param atol: Allowed excursion of the eigenvalues of i Gamma beyond [-1, 1].
    :return: Gamma as float64 ndarray.
    """
    Gamma = np.asarray(Gamma)
    if np.iscomplexobj(Gamma):
        if np.max(np.abs(Gamma.imag), initial=0.0) > config.hermitian_atol:
            raise ValueError("Covariance matrix must be real.")
        Gamma = Gamma.real
    Gamma = Gamma.astype(np.float64)
    if Gamma.ndim != 2 or Gamma.shape[0] != Gamma.shape[1] or Gamma.shape[0] % 2 == 1:
        raise ValueError("Covariance matrix must be 2N x 2N, got shape {}.".format(Gamma.shape))
    if np.max(np.abs(Gamma + Gamma.T), initial=0.0) > config.hermitian_atol:
        raise ValueError("Covariance matrix is not antisymmetric.")
    excursion = physicality_excursion(Gamma)
    if excursion > atol:
        raise ValueError(
            "Covariance matrix is unphysical: eigenvalue of i*Gamma exceeds 1 by {:.3e}.".format(
                excursion
            )
        )
    return Gamma


def clip_to_physical(Gamma):
    """Clips the eigenvalues of i Gamma to [-1, 1].

    :return: Tuple (clipped Gamma, excursion before clipping).
    """
    excursion = physicality_excursion(Gamma)
    if excursion <= 0:
        return Gamma, excursion
    w, V = np.linalg.eigh(1j * Gamma)
    w = np.clip(w, -1.0, 1.0)
    G = np.real(-1j * (V * w) @ V.conj().T)
    return 0.5 * (G - G.T), excursion


@dataclass
class StandardForm:
    """O Gamma O^T = blockdiag(lambda_j [[0, 1], [-1, 0]])."""

    O: np.ndarray
    lambdas: np.ndarray

    @property
    def n_modes(self):
        return self.lambdas.shape[0]

    def block_matrix(self):
        return block_covariance(self.lambdas)

    def reconstruct(self):
        """Covariance matrix O^T D O."""
        return self.O.T @ self.block_matrix() @ self.O


def block_covariance(lambdas):
    """Block-diagonal covariance matrix with blocks lambda_j [[0, 1], [-1, 0]]."""
    lambdas = np.asarray(lambdas, dtype=np.float64)
    D = np.zeros((2 * lambdas.shape[0], 2 * lambdas.shape[0]))
    for j, lam in enumerate(lambdas):
        D[2 * j, 2 * j + 1] = lam
        D[2 * j + 1, 2 * j] = -lam
    return D


def standard_form(Gamma):
    """Brings a covariance matrix to its standard form via the real Schur form.

    :param Gamma: Physical covariance matrix.
    :return: StandardForm with lambda_j >= 0 sorted in descending order.
    """
    Gamma = np.asarray(Gamma, dtype=np.float64)
    n = Gamma.shape[0]
    if n % 2 == 1 or Gamma.ndim != 2 or Gamma.shape[1] != n:
        raise ValueError("Covariance matrix must be 2N x 2N, got shape {}.".format(Gamma.shape))
    if n == 0:
        return StandardForm(np.zeros((0, 0)), np.zeros(0))

    T, Z = linalg.schur(0.5 * (Gamma - Gamma.T), output="real")
    tol = 1e-12 * max(1.0, float(np.max(np.abs(Gamma))))

    rows = []
    lambdas = []
    singles = []
    i = 0
    while i < n:
        if i + 1 < n and abs(T[i + 1, i]) > tol:
            lam = T[i, i + 1]
            pair = [i, i + 1]
            # Swapping the two rows flips the sign of the block.
            if lam < 0:
                pair = [i + 1, i]
                lam = -lam
            rows.append(pair)
            lambdas.append(lam)
            i += 2
        else:
            singles.append(i)
            i += 1
    # Zero eigenvalues come as 1x1 blocks; pair them up.
    for a, b in zip(singles[::2], singles[1::2]):
        rows.append([a, b])
        lambdas.append(0.0)

    order = np.argsort(-np.asarray(lambdas), kind="stable")
    perm = [r for j in order for r in rows[j]]
    O = Z.T[perm]
    lambdas = np.asarray(lambdas)[order]

    sf = StandardForm(O, lambdas)
    residual = np.max(np.abs(O @ Gamma @ O.T - sf.block_matrix()))
    if residual > config.standard_form_atol:
        raise misc.NumericalAbort(
            "Standard form failed: block-diagonal residual {:.3e}.".format(residual)
        )
    return sf


def covariance_from_dense(rho):
    """Covariance matrix Gamma_kl = (i/2) tr([c_k, c_l] rho) of a dense state.

    :param rho: Density matrix of dimension 2^N.
    :return: Real antisymmetric 2N x 2N ndarray.
    """
    rho = fock.check_density_matrix(rho)
    n_modes = fock.check_n_modes(fock.n_modes_from_dim(rho.shape[0]))
    rows, cols = misc.upper_indices(2 * n_modes)
    x = np.empty(rows.shape[0])
    for t, (k, l) in enumerate(zip(rows, cols)):
        # For k != l, (i/2) tr([c_k, c_l] rho) = i tr(c_k c_l rho).
        x[t] = np.real(1j * fock.trace_product(polynomial.monomial_matrix(n_modes, (k, l)), rho))
    return misc.antisymmetric_from_upper(x, 2 * n_modes)


def gaussify(rho):
    """Covariance matrix of the Gaussification of rho (same second moments)."""
    return covariance_from_dense(rho)


def rotated_majoranas(O):
    """Sparse operators c~_a = sum_b O_ab c_b."""
    n_modes = fock.check_n_modes(O.shape[0] // 2)
    majoranas = fock.majorana_operators(n_modes)
    out = []
    for a in range(O.shape[0]):
        acc = sparse.csr_matrix((2**n_modes, 2**n_modes), dtype=np.complex128)
        for b in np.nonzero(np.abs(O[a]) > 0)[0]:
            acc = acc + O[a, b] * majoranas[b]
        out.append(sparse.csr_matrix(acc))
    return out


def dense_from_covariance(Gamma):
    """Dense Gaussian state with the given covariance matrix.

    Builds rho = prod_j (1 + i lambda_j c~_{2j} c~_{2j+1}) / 2 from the
    standard form.

    :param Gamma: Physical covariance matrix of N <= config.dense_max_modes modes.
    :return: Dense density matrix.
    """
    Gamma = check_covariance_matrix(Gamma)
    n_modes = fock.check_n_modes(Gamma.shape[0] // 2)
    sf = standard_form(Gamma)
    lambdas = np.clip(sf.lambdas, -1.0, 1.0)
    c = rotated_majoranas(sf.O)

    dim = 2**n_modes
    eye = sparse.identity(dim, dtype=np.complex128, format="csr")
    rho = np.eye(dim, dtype=np.complex128)
    for j, lam in enumerate(lambdas):
        if lam == 0:
            rho = 0.5 * rho
            continue
        factor = 0.5 * (eye + 1j * lam * (c[2 * j] @ c[2 * j + 1]))
        rho = factor @ rho
    rho = np.asarray(rho)
    return 0.5 * (rho + rho.conj().T)


def purity_from_cm(Gamma):
    """Purity tr(rho^2) = prod_j (1 + lambda_j^2) / 2 of a Gaussian state."""
    Gamma = np.asarray(Gamma, dtype=np.float64)
    # Eigenvalues of i Gamma are +-lambda_j.
    w = np.linalg.eigvalsh(1j * Gamma)
    return float(np.sqrt(np.prod(0.5 * (1.0 + w**2))))


def check_full_rank(Gamma, margin=None):
    """Rejects (near-)pure Gaussian states, whose rho is not invertible.

    :param Gamma: Covariance matrix.
    :param margin: Minimal admissible 1 - |lambda_j|.
    :return: Gamma.
    """
    if margin is None:
        margin = config.near_pure_margin
    if Gamma.shape[0] and physicality_excursion(Gamma) > -margin:
        raise ValueError(
            "Gaussian state is (nearly) pure: 1 - max|lambda| = {:.3e} < {:.1e}.".format(
                -physicality_excursion(Gamma), margin
            )
        )
    return Gamma


def gaussian_tangent(Gamma, k, l):
    """Tangent d rho / d Gamma_kl (k < l, Gamma_lk = -Gamma_kl moving along).

    Equals i c_k c_l rho(Gamma'), with Gamma' the covariance matrix Gamma with
    rows and columns k, l set to zero.

    :param Gamma: Physical covariance matrix.
    :param k: First Majorana index.
    :param l: Second Majorana index (k < l).
    :return: Dense traceless Hermitian ndarray.
    """
    if not 0 <= k < l < Gamma.shape[0]:
        raise ValueError("Expected 0 <= k < l < {}, got ({}, {}).".format(Gamma.shape[0], k, l))
    reduced = np.array(Gamma, dtype=np.float64, copy=True)
    reduced[[k, l], :] = 0.0
    reduced[:, [k, l]] = 0.0
    n_modes = Gamma.shape[0] // 2
    A = 1j * (polynomial.monomial_matrix(n_modes, (k, l)) @ dense_from_covariance(reduced))
    A = np.asarray(A)
    return 0.5 * (A + A.conj().T)


def unitary_tangents(rho, k, l):
    """Tangents of the infinitesimal Gaussian transformations generated by c_k c_l.

    :param rho: Dense (Gaussian) density matrix.
    :param k: First Majorana index.
    :param l: Second Majorana index (k != l).
    :return: Tuple (A_R, A_I) with A_R = [rho, c_k c_l] and
      A_I = i {rho, c_k c_l} - 2 Gamma_kl rho.
    """
    if k == l:
        raise ValueError("Expected distinct Majorana indices, got ({}, {}).".format(k, l))
    n_modes = fock.n_modes_from_dim(rho.shape[0])
    X = polynomial.monomial_matrix(n_modes, (k, l))
    X_rho = np.asarray(X @ rho)
    # rho X = (X^+ rho^+)^+.
    rho_X = np.asarray((X.conj().T @ rho.conj().T).conj().T)
    gamma_kl = np.real(1j * fock.trace_product(X, rho))
    A_R = rho_X - X_rho
    A_I = 1j * (rho_X + X_rho) - 2.0 * gamma_kl * rho
    return A_R, A_I


def inverse_metric_basis(rho, Gamma, metric, traceless=True) -> List[np.ndarray]:
    """Operators (Omega_rho)^-1 (i c_k c_l) for all pairs k < l.

    With traceless=True, (Omega_rho)^-1 (i c_k c_l - Gamma_kl I) is returned,
    which is traceless because (Omega_rho)^-1 (I) = rho.

    :param rho: Dense full-rank Gaussian state.
    :param Gamma: Its covariance matrix.
    :param metric: metrics.AlphaMetric.
    :param traceless: Whether to subtract the trace part.
    :return: List of N(2N-1) dense Hermitian ndarrays (row-major pair order).
    """
    n_modes = fock.n_modes_from_dim(rho.shape[0])
    omega = metrics.Omega(rho, metric)
    rows, cols = misc.upper_indices(2 * n_modes)
    basis = []
    for k, l in zip(rows, cols):
        tau = 1j * polynomial.monomial_matrix(n_modes, (int(k), int(l))).toarray()
        B = omega.inverse(tau)
        if traceless:
            B = B - Gamma[k, l] * rho
        basis.append(B)
    return basis
