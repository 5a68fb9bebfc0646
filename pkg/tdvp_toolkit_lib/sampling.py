"""Seeded sampling of random states, channels and generators."""

import itertools

import numpy as np
from scipy import stats

from tdvp_toolkit_lib import gaussian
from tdvp_toolkit_lib import lindblad
from tdvp_toolkit_lib import polynomial


def get_rng(seed):
    """numpy Generator from a seed (or a Generator, returned as is)."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def random_orthogonal(dim, rng):
    """Haar-random real orthogonal matrix."""
    if dim == 1:
        return np.array([[1.0 if rng.random() < 0.5 else -1.0]])
    return stats.ortho_group.rvs(dim, random_state=rng)


def random_covariance(n_modes, rng, lam_min=-0.9, lam_max=0.9):
    """Random Gaussian covariance matrix O^T (+) lambda_j J O.

    :param n_modes: Number of modes N.
    :param rng: numpy Generator.
    :param lam_min: Lower bound of the sampled lambda_j.
    :param lam_max: Upper bound of the sampled lambda_j.
    :return: Real antisymmetric 2N x 2N ndarray.
    """
    lambdas = rng.uniform(lam_min, lam_max, size=n_modes)
    O = random_orthogonal(2 * n_modes, rng)
    G = O.T @ gaussian.block_covariance(lambdas) @ O
    return 0.5 * (G - G.T)


def random_hermitian(dim, rng, scale=1.0):
    X = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return scale * 0.5 * (X + X.conj().T)


def random_density_matrix(dim, rng, rank=None):
    """Random density matrix from the Ginibre ensemble (full rank by default)."""
    if rank is None:
        rank = dim
    X = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = X @ X.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.real(np.trace(rho))


def random_kraus(dim, n_ops, rng):
    """Kraus operators of a random CPT map (blocks of a random isometry).

    :return: List of n_ops dim x dim ndarrays with sum K^+ K = I.
    """
    X = rng.normal(size=(n_ops * dim, dim)) + 1j * rng.normal(size=(n_ops * dim, dim))
    Q, _ = np.linalg.qr(X)
    return [Q[i * dim : (i + 1) * dim] for i in range(n_ops)]


def random_quadratic_hamiltonian(n_modes, rng, scale=1.0):
    """H = sum_{k<l} i h_kl c_k c_l with real h."""
    terms = {}
    for k, l in itertools.combinations(range(2 * n_modes), 2):
        terms[(k, l)] = 1j * scale * rng.normal()
    return polynomial.PolynomialOperator(n_modes, terms)


def random_hamiltonian(n_modes, rng, quartic_scale=0.5, n_quartic=None):
    """Random Hermitian Hamiltonian of degree <= 4.

    :param n_modes: Number of modes.
    :param rng: numpy Generator.
    :param quartic_scale: Scale of the quartic coefficients.
    :param n_quartic: Number of quartic monomials (all of them if None).
    :return: PolynomialOperator.
    """
    H = random_quadratic_hamiltonian(n_modes, rng)
    quads = list(itertools.combinations(range(2 * n_modes), 4))
    if n_quartic is not None and n_quartic < len(quads):
        choice = rng.choice(len(quads), size=n_quartic, replace=False)
        quads = [quads[i] for i in sorted(choice)]
    # Ordered quartic monomials with real coefficients are Hermitian.
    terms = {q: quartic_scale * rng.normal() for q in quads}
    return H + polynomial.PolynomialOperator(n_modes, terms)


def random_jump(n_modes, rng, max_degree=2):
    """Random (non-Hermitian) jump operator of degree <= max_degree."""
    terms = {}
    for d in range(1, max_degree + 1):
        for idx in itertools.combinations(range(2 * n_modes), d):
            terms[idx] = rng.normal() + 1j * rng.normal()
    return polynomial.PolynomialOperator(n_modes, terms)


def random_spec(n_modes, rng, n_jumps=2, quartic=True, max_jump_degree=2):
    """Random polynomial LindbladSpec (quartic H, jumps of degree <= 2).

    :param n_modes: Number of modes.
    :param rng: numpy Generator.
    :param n_jumps: Number of jump operators.
    :param quartic: Whether H has a quartic part.
    :param max_jump_degree: 1 for linear jumps, 2 for quadratic ones.
    :return: lindblad.LindbladSpec.
    """
    if quartic:
        H = random_hamiltonian(n_modes, rng)
    else:
        H = random_quadratic_hamiltonian(n_modes, rng)
    jumps = [
        lindblad.Jump(random_jump(n_modes, rng, max_jump_degree), rng.uniform(0.1, 1.0))
        for _ in range(n_jumps)
    ]
    return lindblad.LindbladSpec(H, jumps)
