"""1d spinful Hubbard model with spin-decoherence jumps, and its diagnostics.

Site x (0-based) and spin s (0 = up, 1 = down) map to mode 2x + s.
"""

from dataclasses import dataclass
from typing import List

import numpy as np

from tdvp_toolkit_lib import fock
from tdvp_toolkit_lib import gaussian
from tdvp_toolkit_lib import lindblad
from tdvp_toolkit_lib import misc
from tdvp_toolkit_lib import polynomial


logger = misc.get_logger(__name__)

UP = 0
DOWN = 1


@dataclass
class HubbardParams:
    """Parameters of H = J sum (a^+_{x,s} a_{x+1,s} + h.c.) + u sum n_up n_down + mu sum n.

    Jumps j_x = a^+_{x,up} a_{x,down} with rate kappa.
    """

    L: int = 4
    J: float = 1.0
    u: float = 4.0
    mu: float = -2.0
    kappa: float = 1.0
    periodic: bool = True

    def __post_init__(self):
        if int(self.L) != self.L or self.L < 2:
            raise ValueError("Number of sites must be an integer >= 2, got {}.".format(self.L))
        self.L = int(self.L)
        if not self.kappa >= 0:
            raise ValueError("Decoherence rate must be nonnegative, got {}.".format(self.kappa))

    @property
    def n_modes(self):
        return 2 * self.L

    def bonds(self):
        """Nearest-neighbour pairs (x, x+1); periodic wraps around."""
        if self.periodic:
            return [(x, (x + 1) % self.L) for x in range(self.L)]
        return [(x, x + 1) for x in range(self.L - 1)]


def mode(x, s):
    return 2 * x + s


def hamiltonian(params: HubbardParams):
    """Hubbard Hamiltonian as a PolynomialOperator.

    The hopping is summed literally over bonds(); for L = 2 with periodic
    boundaries both bonds connect the same pair of sites.
    """
    n = params.n_modes
    hops = [
        polynomial.to_majorana_polynomial([(params.J, [(mode(x, s), True), (mode(y, s), False)])], n)
        for x, y in params.bonds()
        for s in (UP, DOWN)
    ]
    terms = []
    for x in range(params.L):
        up, down = mode(x, UP), mode(x, DOWN)
        terms.append((params.u, [(up, True), (up, False), (down, True), (down, False)]))
        for m in (up, down):
            terms.append((params.mu, [(m, True), (m, False)]))
    # J is real, so the conjugate of a^+_x a_y is a^+_y a_x.
    return polynomial.to_majorana_polynomial(terms, n) + polynomial.hermitian_sum(hops)


def jump_operators(params: HubbardParams):
    """Spin-flip jumps j_x = a^+_{x,up} a_{x,down}."""
    n = params.n_modes
    return [
        polynomial.to_majorana_polynomial(
            [(1.0, [(mode(x, UP), True), (mode(x, DOWN), False)])], n
        )
        for x in range(params.L)
    ]


def build_hubbard(params: HubbardParams):
    """LindbladSpec of the Hubbard model with spin decoherence.

    :param params: HubbardParams.
    :return: lindblad.LindbladSpec; no jumps when kappa = 0.
    """
    jumps = []
    if params.kappa > 0:
        jumps = [lindblad.Jump(j, params.kappa) for j in jump_operators(params)]
    return lindblad.LindbladSpec(hamiltonian(params), jumps)


def is_covariance(state):
    """Covariance matrices are traceless, density matrices have unit trace."""
    state = np.asarray(state)
    return abs(np.trace(state)) < 0.5


def _mode_occupations(state):
    if is_covariance(state):
        Gamma = np.asarray(state, dtype=np.float64)
        n_modes = Gamma.shape[0] // 2
        return np.array([0.5 * (1.0 - Gamma[2 * m, 2 * m + 1]) for m in range(n_modes)])
    n_modes = fock.n_modes_from_dim(state.shape[0])
    return np.array(
        [np.real(fock.trace_product(fock.number_operator(n_modes, m), state)) for m in range(n_modes)]
    )


@dataclass
class Occupations:
    n_up: float
    n_down: float
    up: List[float]
    down: List[float]

    @property
    def total(self):
        return self.n_up + self.n_down


def occupations(state):
    """Spin-resolved occupations.

    :param state: Dense density matrix or covariance matrix of 2L modes.
    :return: Occupations with totals and per-site lists.
    """
    n = _mode_occupations(state)
    up = [float(v) for v in n[UP::2]]
    down = [float(v) for v in n[DOWN::2]]
    return Occupations(sum(up), sum(down), up, down)


def total_particle_number(state):
    return occupations(state).total


def _density_density(state, a, b):
    """<n_a n_b> for modes a != b."""
    if is_covariance(state):
        n_modes = state.shape[0] // 2
        P = polynomial.number_polynomial(n_modes, a) * polynomial.number_polynomial(n_modes, b)
        return float(np.real(gaussian.polynomial_expectation(np.asarray(state, dtype=np.float64), P)))
    n_modes = fock.n_modes_from_dim(state.shape[0])
    op = fock.number_operator(n_modes, a) @ fock.number_operator(n_modes, b)
    return float(np.real(fock.trace_product(op, state)))


@dataclass
class SpinOrder:
    s: List[float]
    c1: float
    m_s: float


def spin_order(state, periodic=True):
    """Local spin densities, nearest-neighbour S^z correlator and staggered magnetization.

    s_x = (n_{x,up} - n_{x,down}) / 2, C1 = (1/L) sum_x <S^z_x S^z_{x+1}>,
    m_s = (1/L) sum_x (-1)^x s_x with sites counted from 1.

    :param state: Dense density matrix or covariance matrix of 2L modes.
    :param periodic: Whether the bond (L, 1) is included in C1.
    :return: SpinOrder.
    """
    occ = occupations(state)
    L = len(occ.up)
    s = [0.5 * (u - d) for u, d in zip(occ.up, occ.down)]
    params = HubbardParams(L=L, periodic=periodic)

    c1 = 0.0
    for x, y in params.bonds():
        corr = 0.0
        for sx, sign_x in ((UP, 1.0), (DOWN, -1.0)):
            for sy, sign_y in ((UP, 1.0), (DOWN, -1.0)):
                corr += sign_x * sign_y * _density_density(state, mode(x, sx), mode(y, sy))
        c1 += 0.25 * corr
    c1 /= L
    m_s = sum((-1.0) ** (x + 1) * sx for x, sx in enumerate(s)) / L
    return SpinOrder(s, float(c1), float(m_s))


def polarized_state(L):
    """Dense state prod_x a^+_{x,up} |0>."""
    return fock.basis_state_projector(2 * L, [mode(x, UP) for x in range(L)])


def polarized_covariance(L):
    """Covariance matrix of prod_x a^+_{x,up} |0>."""
    lambdas = []
    for x in range(L):
        # Occupied modes have Gamma_{2m,2m+1} = -1, empty ones +1.
        lambdas.extend([-1.0, 1.0])
    return gaussian.block_covariance(lambdas)


def energy(state, params: HubbardParams):
    """<H> for a dense state or (Gaussian) covariance matrix."""
    H = hamiltonian(params)
    if is_covariance(state):
        return float(np.real(gaussian.polynomial_expectation(np.asarray(state, dtype=np.float64), H)))
    return float(np.real(fock.trace_product(H.to_sparse(), state)))
