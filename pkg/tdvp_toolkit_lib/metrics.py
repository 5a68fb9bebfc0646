"""Monotone metrics of alpha type on density matrices.

The superoperator of a single term is

  Omega_rho^alpha(sigma) = (rho^-alpha sigma rho^(alpha-1) + rho^(alpha-1) sigma rho^-alpha) / 2,

and a metric is a convex combination of such terms. Everything is evaluated
in the eigenbasis of rho, where Omega acts as an entrywise multiplication.
"""

from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from tdvp_toolkit_lib import config
from tdvp_toolkit_lib import fock
from tdvp_toolkit_lib import misc


logger = misc.get_logger(__name__)

# Exponents of metrics known by name.
NAMED_METRICS = {
    "wigner_yanase": 0.5,
    # Largest monotone metric (right logarithmic derivative); alpha = 1 is equivalent.
    "rld": 0.0,
}


@dataclass(frozen=True)
class AlphaMetric:
    """Convex combination sum_i w_i Omega^(alpha_i) of alpha metrics."""

    terms: Tuple[Tuple[float, float], ...]

    def __post_init__(self):
        terms = tuple((float(w), float(a)) for w, a in self.terms)
        if len(terms) == 0:
            raise ValueError("A metric needs at least one term.")
        for w, a in terms:
            if not w > 0:
                raise ValueError("Metric weights must be positive, got {}.".format(w))
            if not 0.0 <= a <= 1.0:
                raise ValueError("Metric exponent alpha must lie in [0, 1], got {}.".format(a))
        total = sum(w for w, _ in terms)
        if abs(total - 1.0) > 1e-12:
            raise ValueError("Metric weights must sum to 1, got {}.".format(total))
        object.__setattr__(self, "terms", terms)

    @classmethod
    def single(cls, alpha):
        return cls(((1.0, alpha),))

    @classmethod
    def named(cls, name):
        if name not in NAMED_METRICS:
            raise ValueError("Unknown metric: {}".format(name))
        return cls.single(NAMED_METRICS[name])

    @classmethod
    def convex(cls, terms: Sequence[Tuple[float, float]]):
        """Convex combination; the weights are normalized to sum to 1."""
        terms = [(float(w), float(a)) for w, a in terms]
        total = sum(w for w, _ in terms)
        if not total > 0:
            raise ValueError("Metric weights must be positive.")
        return cls(tuple((w / total, a) for w, a in terms))

    @property
    def alphas(self):
        return [a for _, a in self.terms]

    def kernel(self, p):
        """Entrywise kernel K_ab of Omega for the spectrum p of rho."""
        p = np.asarray(p, dtype=np.float64)
        K = np.zeros((p.shape[0], p.shape[0]))
        for w, a in self.terms:
            K += w * 0.5 * (
                np.outer(p ** (-a), p ** (a - 1.0)) + np.outer(p ** (a - 1.0), p ** (-a))
            )
        return K

    def __str__(self):
        return "+".join("{:g}*alpha={:g}".format(w, a) for w, a in self.terms)


class Omega:
    """The superoperator Omega_rho of a metric, diagonalized once per state.

    :param rho: Strictly positive density matrix.
    :param metric: AlphaMetric.
    """

    def __init__(self, rho, metric: AlphaMetric, floor=None):
        if floor is None:
            floor = config.eigenvalue_floor
        rho = fock.check_density_matrix(rho)
        p, V = np.linalg.eigh(0.5 * (rho + rho.conj().T))
        if p[0] <= floor:
            raise ValueError(
                "Density matrix is singular: smallest eigenvalue {:.3e} <= {:.1e}.".format(
                    p[0], floor
                )
            )
        self.rho = rho
        self.metric = metric
        self.p = p
        self.V = V
        self.kernel = metric.kernel(p)

    def to_eigenbasis(self, X):
        return self.V.conj().T @ X @ self.V

    def from_eigenbasis(self, X):
        return self.V @ X @ self.V.conj().T

    def apply(self, sigma):
        return self.from_eigenbasis(self.kernel * self.to_eigenbasis(sigma))

    def inverse(self, tau):
        return self.from_eigenbasis(self.to_eigenbasis(tau) / self.kernel)

    def form(self, A, B):
        """tr(A^+ Omega(B))."""
        return complex(np.sum(np.conj(self.to_eigenbasis(A)) * self.kernel * self.to_eigenbasis(B)))

    def gram(self, tangents):
        """Matrix of forms tr(A_j^+ Omega(A_k)) for a list of operators."""
        T = np.array([self.to_eigenbasis(A) for A in tangents])
        sqrt_k = np.sqrt(self.kernel)
        W = (T * sqrt_k).reshape(len(tangents), -1)
        return W.conj() @ W.T


def omega_apply(rho, metric, sigma):
    """Omega_rho(sigma) for the given metric.

    :param rho: Strictly positive density matrix.
    :param metric: AlphaMetric.
    :param sigma: Operator of the same dimension.
    :return: Dense ndarray.
    """
    return Omega(rho, metric).apply(sigma)


def omega_inverse(rho, metric, tau):
    """Omega_rho^-1(tau); omega_apply(rho, metric, result) equals tau."""
    return Omega(rho, metric).inverse(tau)


def metric_form(rho, metric, A, B):
    """M_rho(A, B) = tr(A^+ Omega_rho(B)).

    :return: Complex number; real and symmetric for Hermitian A, B.
    """
    return Omega(rho, metric).form(A, B)


def metric_norm(rho, metric, A):
    """sqrt(M_rho(A, A))."""
    return float(np.sqrt(max(np.real(metric_form(rho, metric, A, A)), 0.0)))


def apply_channel(kraus_ops, X):
    """Applies the map X -> sum_i K_i X K_i^+.

    :param kraus_ops: List of Kraus operators (dense ndarrays).
    :param X: Operator.
    :return: Dense ndarray.
    """
    out = np.zeros_like(np.asarray(X, dtype=np.complex128))
    for K in kraus_ops:
        out += K @ X @ K.conj().T
    return out
