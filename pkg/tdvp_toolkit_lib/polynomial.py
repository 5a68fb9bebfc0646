"""Symbolic polynomials in Majorana operators.

A monomial c_{j1} c_{j2} ... c_{jk} is stored as the tuple of its indices in
canonical (strictly increasing) order. Products are brought back to canonical
form with c_k^2 = I and c_k c_l = -c_l c_k (k != l), counting transpositions
exactly so that signs are integers.
"""

import functools
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np
from scipy import sparse

from tdvp_toolkit_lib import config
from tdvp_toolkit_lib import fock


@functools.lru_cache(maxsize=None)
def reduce_indices(indices):
    """Brings a Majorana monomial to canonical form.

    :param indices: Tuple of Majorana indices (any order, repeats allowed).
    :return: Tuple (sign, canonical_indices) with sign in {+1, -1} and the
      canonical indices strictly increasing.
    """
    idx = list(indices)
    sign = 1
    # Bubble sort; only transpositions of distinct operators change the sign.
    n = len(idx)
    for i in range(n):
        swapped = False
        for j in range(n - 1 - i):
            if idx[j] > idx[j + 1]:
                idx[j], idx[j + 1] = idx[j + 1], idx[j]
                sign = -sign
                swapped = True
        if not swapped:
            break

    # Equal operators are now adjacent; c_k c_k = I.
    out = []
    for k in idx:
        if out and out[-1] == k:
            out.pop()
        else:
            out.append(k)
    return sign, tuple(out)


@functools.lru_cache(maxsize=None)
def multiply_indices(a, b):
    """Product of two canonical monomials: (sign, canonical indices)."""
    return reduce_indices(a + b)


def reversal_sign(degree):
    """Sign picked up by reversing a product of `degree` distinct Majoranas."""
    return -1 if (degree * (degree - 1) // 2) % 2 else 1


@dataclass(frozen=True)
class MajoranaMonomial:
    """coefficient * c_{indices[0]} c_{indices[1]} ..."""

    coefficient: complex
    indices: Tuple[int, ...]

    @property
    def degree(self):
        return len(self.indices)

    def canonical(self):
        sign, idx = reduce_indices(tuple(self.indices))
        return MajoranaMonomial(sign * complex(self.coefficient), idx)


class PolynomialOperator:
    """A finite sum of Majorana monomials on a fixed number of modes.

    The monomials are kept in canonical form: canonical index tuples, merged
    duplicates, and coefficients with modulus at least config.coefficient_atol.
    """

    def __init__(self, n_modes, terms=None):
        """
        :param n_modes: Number of fermionic modes (2*n_modes Majoranas).
        :param terms: Dict {indices tuple: coefficient} or an iterable of
          MajoranaMonomial. Indices need not be canonical.
        """
        if int(n_modes) != n_modes or n_modes < 1:
            raise ValueError("Number of modes must be a positive integer, got {}.".format(n_modes))
        self.n_modes = int(n_modes)
        self._terms: Dict[Tuple[int, ...], complex] = {}

        if terms is None:
            return
        if isinstance(terms, dict):
            items = terms.items()
        else:
            items = ((m.indices, m.coefficient) for m in terms)
        for indices, coef in items:
            self._add_term(tuple(int(k) for k in indices), complex(coef))
        self._prune()

    @classmethod
    def identity(cls, n_modes, coefficient=1.0):
        return cls(n_modes, {(): coefficient})

    @classmethod
    def majorana(cls, n_modes, k):
        return cls(n_modes, {(k,): 1.0})

    def _add_term(self, indices, coef):
        if not np.isfinite(coef):
            raise ValueError("Non-finite coefficient {}.".format(coef))
        for k in indices:
            if not 0 <= k < 2 * self.n_modes:
                raise ValueError(
                    "Majorana index {} out of range for {} modes.".format(k, self.n_modes)
                )
        sign, idx = reduce_indices(indices)
        self._terms[idx] = self._terms.get(idx, 0.0) + sign * coef

    def _prune(self):
        self._terms = {
            k: v for k, v in self._terms.items() if abs(v) >= config.coefficient_atol
        }

    def _check_compatible(self, other):
        if other.n_modes != self.n_modes:
            raise ValueError(
                "Mode count mismatch: {} vs {}.".format(self.n_modes, other.n_modes)
            )

    @property
    def monomials(self) -> List[MajoranaMonomial]:
        """Monomials sorted by degree, then lexicographically."""
        keys = sorted(self._terms.keys(), key=lambda k: (len(k), k))
        return [MajoranaMonomial(self._terms[k], k) for k in keys]

    def items(self):
        return self._terms.items()

    def coefficient(self, indices):
        sign, idx = reduce_indices(tuple(indices))
        return sign * self._terms.get(idx, 0.0)

    def __len__(self):
        return len(self._terms)

    def is_zero(self):
        return len(self._terms) == 0

    def degree(self):
        """Largest monomial degree (0 for the empty polynomial)."""
        return max((len(k) for k in self._terms), default=0)

    def without_constant(self):
        return PolynomialOperator(
            self.n_modes, {k: v for k, v in self._terms.items() if len(k) > 0}
        )

    def __add__(self, other):
        if np.isscalar(other):
            other = PolynomialOperator.identity(self.n_modes, other)
        self._check_compatible(other)
        out = PolynomialOperator(self.n_modes, dict(self._terms))
        for k, v in other._terms.items():
            out._terms[k] = out._terms.get(k, 0.0) + v
        out._prune()
        return out

    __radd__ = __add__

    def __neg__(self):
        return PolynomialOperator(self.n_modes, {k: -v for k, v in self._terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if np.isscalar(other):
            return PolynomialOperator(
                self.n_modes, {k: complex(other) * v for k, v in self._terms.items()}
            )
        self._check_compatible(other)
        out = PolynomialOperator(self.n_modes)
        for ka, va in self._terms.items():
            for kb, vb in other._terms.items():
                sign, idx = multiply_indices(ka, kb)
                out._terms[idx] = out._terms.get(idx, 0.0) + sign * va * vb
        out._prune()
        return out

    def __rmul__(self, other):
        if np.isscalar(other):
            return self * other
        return NotImplemented

    def adjoint(self):
        """Hermitian conjugate (c_{j1}...c_{jk})^+ = c_{jk}...c_{j1}."""
        return PolynomialOperator(
            self.n_modes,
            {k: reversal_sign(len(k)) * np.conj(v) for k, v in self._terms.items()},
        )

    def is_hermitian(self, atol=None):
        if atol is None:
            atol = config.hermitian_atol
        diff = self - self.adjoint()
        return all(abs(v) <= atol for v in diff._terms.values())

    def is_even(self):
        return all(len(k) % 2 == 0 for k in self._terms)

    def to_sparse(self):
        """Sparse CSR realization on the 2^N-dimensional Fock space."""
        dim = 2**self.n_modes
        out = sparse.csr_matrix((dim, dim), dtype=np.complex128)
        for k, v in self._terms.items():
            out = out + v * monomial_matrix(self.n_modes, k)
        return sparse.csr_matrix(out)

    def to_dense(self):
        return self.to_sparse().toarray()

    def __repr__(self):
        parts = ["({:.6g})*c{}".format(m.coefficient, list(m.indices)) for m in self.monomials]
        return "PolynomialOperator(n_modes={}, {})".format(self.n_modes, " + ".join(parts) or "0")


def commutator(A, B):
    return A * B - B * A


def anticommutator(A, B):
    return A * B + B * A


@functools.lru_cache(maxsize=4096)
def monomial_matrix(n_modes, indices):
    """Sparse matrix of c_{indices[0]} c_{indices[1]} ... (shared, read-only)."""
    dim = 2**fock.check_n_modes(n_modes)
    out = sparse.identity(dim, dtype=np.complex128, format="csr")
    majoranas = fock.majorana_operators(n_modes)
    for k in indices:
        out = out @ majoranas[k]
    return sparse.csr_matrix(out)


def ladder_operator(n_modes, mode, is_creation):
    """a_m^+ = (c_{2m} + i c_{2m+1}) / 2 and a_m = (c_{2m} - i c_{2m+1}) / 2."""
    if not 0 <= mode < n_modes:
        raise ValueError("Mode index {} out of range for {} modes.".format(mode, n_modes))
    phase = 0.5j if is_creation else -0.5j
    return PolynomialOperator(n_modes, {(2 * mode,): 0.5, (2 * mode + 1,): phase})


def to_majorana_polynomial(terms, n_modes):
    """Converts a second-quantized operator to a Majorana polynomial.

    :param terms: Iterable of (coefficient, [(mode, is_creation), ...]); each
      term is the coefficient times the product of the ladder operators in the
      given order. E.g. (1.0, [(0, True), (1, False)]) is a_0^+ a_1.
    :param n_modes: Number of modes.
    :return: PolynomialOperator in canonical form.
    """
    out = PolynomialOperator(n_modes)
    for term in terms:
        try:
            coef, ops = term
        except (TypeError, ValueError):
            raise ValueError("Malformed term {!r}: expected (coefficient, operators).".format(term))
        coef = complex(coef)
        if not np.isfinite(coef):
            raise ValueError("Non-finite coefficient in term {!r}.".format(term))

        product = PolynomialOperator.identity(n_modes, coef)
        for op in ops:
            try:
                mode, is_creation = op
            except (TypeError, ValueError):
                raise ValueError("Malformed ladder operator {!r} in term {!r}.".format(op, term))
            if int(mode) != mode or not isinstance(is_creation, (bool, np.bool_)):
                raise ValueError("Malformed ladder operator {!r} in term {!r}.".format(op, term))
            product = product * ladder_operator(n_modes, int(mode), bool(is_creation))
        out = out + product
    return out


def number_polynomial(n_modes, mode):
    """a_m^+ a_m = (1 - i c_{2m} c_{2m+1}) / 2."""
    return to_majorana_polynomial([(1.0, [(mode, True), (mode, False)])], n_modes)


def hermitian_sum(polys: Sequence[PolynomialOperator]):
    """Sum of the given polynomials and their adjoints."""
    out = None
    for p in polys:
        s = p + p.adjoint()
        out = s if out is None else out + s
    return out
