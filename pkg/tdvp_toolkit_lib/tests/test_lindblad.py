import unittest

import numpy as np

from tdvp_toolkit_lib import fock
from tdvp_toolkit_lib import integrate
from tdvp_toolkit_lib import lindblad
from tdvp_toolkit_lib import misc
from tdvp_toolkit_lib import polynomial
from tdvp_toolkit_lib import sampling
from tdvp_toolkit_lib.lindblad import Jump, LindbladSpec


def decay_spec(rate=1.0):
    """Single mode, H = 0, j = a."""
    H = polynomial.PolynomialOperator(1)
    return LindbladSpec(H, [Jump(polynomial.ladder_operator(1, 0, False), rate)])


class TestIntegrate(unittest.TestCase):

    def test_sample_grid(self):
        self.assertEqual(integrate.sample_grid(20.0, 1e-3, 0.05), (401, 50))
        self.assertEqual(integrate.sample_grid(1.0, 0.1, 0.1), (11, 1))
        with self.assertRaises(ValueError):
            integrate.sample_grid(1.0, 0.0, 0.1)
        with self.assertRaises(ValueError):
            integrate.sample_grid(-1.0, 0.1, 0.1)
        with self.assertRaises(ValueError):
            integrate.sample_grid(1.0, 0.1, 0.05)
        with self.assertRaises(ValueError):
            integrate.sample_grid(1.0, 0.1, 0.15)
        with self.assertRaises(ValueError):
            integrate.sample_grid(1.0, 0.1, 0.3)

    def test_exponential(self):
        traj = integrate.integrate_fixed_step(lambda t, y: -y, np.array([1.0]), 1.0, 0.01, 0.25)
        self.assertEqual(len(traj), 5)
        self.assertTrue(np.allclose(traj.times, [0.0, 0.25, 0.5, 0.75, 1.0]))
        self.assertTrue(np.allclose([s[0] for s in traj.states], np.exp(-np.array(traj.times)), atol=1e-9))

    def test_callbacks_and_abort(self):
        seen = []
        traj = integrate.integrate_fixed_step(
            lambda t, y: np.ones_like(y), np.zeros(1), 0.5, 0.1, 0.1,
            on_sample=lambda t, y: seen.append(t), keep_states=False,
        )
        self.assertEqual(len(seen), 6)
        self.assertEqual(traj.states, [])
        with self.assertRaises(ValueError):
            traj.final()
        with self.assertRaises(misc.NumericalAbort):
            integrate.integrate_fixed_step(lambda t, y: np.full_like(y, np.inf), np.zeros(1), 0.1, 0.1)


class TestLindblad(unittest.TestCase):

    def setUp(self) -> None:
        self.rng = np.random.default_rng(2)

    def test_spec_validation(self):
        c0 = polynomial.PolynomialOperator.majorana(1, 0)
        with self.assertRaises(ValueError):
            LindbladSpec(1j * c0)
        with self.assertRaises(ValueError):
            LindbladSpec(c0, [Jump(c0, -1.0)])
        with self.assertRaises(ValueError):
            LindbladSpec(c0, [Jump(polynomial.PolynomialOperator.majorana(2, 0), 1.0)])
        spec = LindbladSpec(c0, [(c0, 0.5)])
        self.assertEqual(spec.jumps[0].rate, 0.5)
        self.assertEqual(spec.n_modes, 1)
        self.assertTrue(spec.is_polynomial())
        self.assertFalse(LindbladSpec(np.eye(2)).is_polynomial())

    def test_rhs_matches_definition(self):
        spec = sampling.random_spec(2, self.rng)
        rho = sampling.random_density_matrix(4, self.rng)
        H = spec.hamiltonian.to_dense()
        expected = -1j * (H @ rho - rho @ H)
        for jump in spec.jumps:
            j = jump.operator.to_dense()
            jd = j.conj().T
            expected += jump.rate * (j @ rho @ jd - 0.5 * (jd @ j @ rho + rho @ jd @ j))
        L = lindblad.lindblad_rhs(spec, rho)
        self.assertTrue(np.allclose(L, expected))
        fock.check_tangent_operator(L, atol=1e-10)
        with self.assertRaises(ValueError):
            lindblad.lindblad_rhs(spec, np.eye(2) / 2)

    def test_single_mode_decay(self):
        rho0 = fock.basis_state_projector(1, [0])
        traj = lindblad.integrate_exact(decay_spec(), rho0, t_final=2.0, dt=1e-3, sample_interval=0.5)
        n = fock.number_operator(1, 0)
        occ = [np.real(fock.trace_product(n, rho)) for rho in traj.states]
        self.assertTrue(np.allclose(occ, np.exp(-np.array(traj.times)), atol=1e-6))

    def test_trace_and_positivity(self):
        spec = sampling.random_spec(2, self.rng)
        rho0 = sampling.random_density_matrix(4, self.rng)
        traj = lindblad.integrate_exact(spec, rho0, t_final=1.0, dt=1e-3, sample_interval=0.1)
        for rho in traj.states:
            self.assertTrue(abs(np.trace(rho) - 1.0) < 1e-9)
            fock.check_density_matrix(rho)

    def test_closed_system_keeps_purity(self):
        H = sampling.random_hamiltonian(2, self.rng)
        rho0 = fock.basis_state_projector(2, [1])
        samples = []
        lindblad.integrate_exact(
            LindbladSpec(H), rho0, t_final=0.5, dt=1e-3, sample_interval=0.1,
            on_sample=lambda t, rho: samples.append(fock.purity(rho)), keep_states=False,
        )
        self.assertEqual(len(samples), 6)
        self.assertTrue(np.allclose(samples, 1.0, atol=1e-9))

    def test_zero_rate_jump_is_ignored(self):
        spec = decay_spec(rate=0.0)
        self.assertEqual(spec.generator().jumps, [])
        rho = fock.basis_state_projector(1, [0])
        self.assertTrue(np.allclose(lindblad.lindblad_rhs(spec, rho), 0.0))

    def test_invalid_initial_state(self):
        with self.assertRaises(ValueError):
            lindblad.integrate_exact(decay_spec(), 2.0 * np.eye(2), t_final=0.1, dt=0.01)
        with self.assertRaises(ValueError):
            lindblad.integrate_exact(decay_spec(), np.eye(4) / 4, t_final=0.1, dt=0.01)


if __name__ == "__main__":
    unittest.main()
