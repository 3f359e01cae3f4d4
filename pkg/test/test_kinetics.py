# Copyright: (C) 2026 The polariton developers
# License: GNU GPL version 3

import math
import unittest

import numpy as np
from scipy import integrate, optimize

from polariton import grid as grd
from polariton import kinetics
from polariton import material as mat
from polariton import scattering
from polariton.error import NumericalError
from polariton.kinetics import KineticState, Kernels, Observables, PumpSpec


class TestPump(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        material = mat.MaterialSet()
        field = mat.field_state(material, 0.0)
        # Node 1 sits at k = 0.02, the default pump wavenumber
        cls.grid = grd.build_grid(material, field, N=26, k_max=0.5)


    def test_pump_spec(self):
        self.assertEqual(PumpSpec(), PumpSpec(1e-3, 0.02, 0.5, 50.0))
        bad_values = [{'p0': -1e-3}, {'k_p': -0.1}, {'Gamma': 0.0}, {'t0': -5.0},
                      {'p0': float('nan')}]
        for values in bad_values:
            with self.assertRaises(ValueError):
                PumpSpec(**values)

    def test_pump_rate(self):
        spec = PumpSpec(p0=2e-3)
        self.assertEqual(kinetics.pump_rate(1, 0.0, spec, self.grid), 0.0)
        self.assertAlmostEqual(kinetics.pump_rate(1, 50.0, spec, self.grid),
                               2e-3 * math.tanh(1.0), places=15)
        # Far from the pump energy the envelope vanishes
        self.assertLess(kinetics.pump_rate(25, 1e4, spec, self.grid), 1e-30)
        with self.assertRaises(ValueError):
            kinetics.pump_rate(1, -1.0, spec, self.grid)

    def test_pump_profile(self):
        profile = kinetics.pump_profile(PumpSpec(), self.grid)
        self.assertEqual(int(np.argmax(profile)), 1)
        self.assertAlmostEqual(profile[1], 1e-3, places=15)


class TestCollisions(unittest.TestCase):

    OCCUPATIONS = np.array([1.0, 2.0, 0.5, 0.25])

    def test_pair_channel(self):
        state = KineticState(0.0, self.OCCUPATIONS)
        channels = scattering.PairChannels([0], [1], [2], [3], [0.1], [1.0, 2.0, 3.0, 4.0])
        # forward 1*2*1.5*1.25 = 3.75, backward 0.5*0.25*2*3 = 0.75
        change = kinetics.collision_pp(state, channels)
        self.assertTrue(np.allclose(change, [-0.3, -0.15, 0.1, 0.075], rtol=1e-14, atol=0))
        self.assertAlmostEqual(np.dot(channels.shell_weights, change), 0.0, places=15)

    def test_repeated_node(self):
        state = KineticState(0.0, self.OCCUPATIONS)
        channels = scattering.PairChannels([1], [1], [0], [2], [0.1], np.ones(4))
        # forward 4*2*1.5 = 12, backward 0.5*9 = 4.5
        change = kinetics.collision_pp(state, channels)
        self.assertTrue(np.allclose(change, [0.75, -1.5, 0.75, 0.0], rtol=1e-14, atol=1e-15))

    def test_phonon_toy(self):
        energies = np.array([0.0, 1.0, 2.0])
        base = np.array([[0.0, 0.2, 0.1], [0.2, 0.0, 0.3], [0.1, 0.3, 0.0]])
        weights = np.array([1.0, 5.0, 9.0])
        kernel = scattering.PhononKernel(base, energies, 4.0, weights)
        state = KineticState(0.0, np.array([0.5, 0.2, 0.1]))
        gain, loss = kinetics.pph_rates(state, kernel)
        self.assertTrue(np.all(gain >= 0) and np.all(loss >= 0))
        change = kinetics.collision_pph(state, kernel)
        self.assertTrue(np.allclose(change, gain - loss))
        self.assertLess(abs(np.dot(weights, change)), 1e-14 * np.dot(weights, gain))

    def test_stimulated_gain(self):
        energies = np.array([0.0, 1.0, 2.0])
        base = np.array([[0.0, 0.2, 0.1], [0.2, 0.0, 0.3], [0.1, 0.3, 0.0]])
        kernel = scattering.PhononKernel(base, energies, 4.0, np.array([1.0, 5.0, 9.0]))
        empty = KineticState(0.0, np.array([0.0, 0.2, 0.0]))
        filled = KineticState(0.0, np.array([10.0, 0.2, 0.0]))
        gain_empty, _ = kinetics.pph_rates(empty, kernel)
        gain_filled, _ = kinetics.pph_rates(filled, kernel)
        self.assertAlmostEqual(gain_filled[0] / gain_empty[0], 11.0, places=12)

        channels = scattering.PairChannels([1], [1], [0], [2], [0.1], np.ones(3))
        before = kinetics.collision_pp(empty, channels)
        after = kinetics.collision_pp(filled, channels)
        self.assertGreater(after[0], before[0])
        self.assertGreater(after[0], 0.0)

    def test_two_node_balance(self):
        gap, temperature = 0.5, 4.0
        weights = np.array([1.0, 5.0])
        base = np.array([[0.0, 0.05], [0.05, 0.0]])
        kernel = scattering.PhononKernel(base, np.array([0.0, gap]), temperature, weights)
        total = 2.5
        boltzmann = math.exp(-gap / (mat.KB_MEV_PER_K * temperature))

        def drift(t, n):
            return kinetics.collision_pph(KineticState(t, n), kernel)

        solution = integrate.solve_ivp(drift, (0.0, 2000.0), [0.0, total / weights[1]],
                                       method='LSODA', rtol=1e-10, atol=1e-12)
        final = solution.y[:, -1]
        self.assertAlmostEqual(np.dot(weights, final), total, places=8)

        def imbalance(n0):
            n1 = (total - n0) / weights[1]
            return n1 * (1.0 + n0) - boltzmann * n0 * (1.0 + n1)

        n0 = optimize.brentq(imbalance, 0.0, total, xtol=1e-14)
        self.assertAlmostEqual(final[0] / n0, 1.0, places=6)

    def test_empty_state(self):
        material = mat.MaterialSet()
        grid = grd.build_grid(material, mat.field_state(material, 0.0), N=16)
        state = kinetics.initial_state(grid)
        self.assertEqual(state.t, 0.0)
        self.assertEqual(state.n.tolist(), [0.0] * 16)
        kernels = Kernels(grid, None, None)
        self.assertEqual(kinetics.rhs(state, kernels, PumpSpec()).tolist(), [0.0] * 16)


class TestEvolution(unittest.TestCase):

    N = 24

    @classmethod
    def setUpClass(cls):
        cls.material = mat.MaterialSet()
        cls.field = mat.field_state(cls.material, 0.0)
        cls.grid = grd.build_grid(cls.material, cls.field, N=cls.N)
        cls.kernels = kinetics.build_kernels(cls.grid, cls.material, cls.field)
        # A small thermal-looking distribution
        cls.start = KineticState(0.0, 1e-3 * np.exp(-(cls.grid.energies
                                                      - cls.grid.energies[0]) / 2.0))


    def test_build_kernels(self):
        self.assertIsInstance(self.kernels.phonon, scattering.PhononKernel)
        self.assertIsInstance(self.kernels.pairs, scattering.PairChannels)
        only_phonons = kinetics.build_kernels(self.grid, self.material, self.field, pp=False)
        self.assertIsNone(only_phonons.pairs)
        self.assertIs(only_phonons.grid, self.grid)

    def test_collisions_conserve(self):
        rng = np.random.RandomState(3)
        weights = self.grid.shell_weights
        for _ in range(5):
            state = KineticState(0.0, rng.uniform(0.0, 2.0, self.N))
            change = kinetics.rhs(state, self.kernels, decay=False)
            gain, loss = kinetics.pph_rates(state, self.kernels.phonon)
            pairs, n = self.kernels.pairs, state.n
            traffic = pairs.weight * (n[pairs.i] * n[pairs.j] * (1 + n[pairs.l]) * (1 + n[pairs.m])
                                      + n[pairs.l] * n[pairs.m] * (1 + n[pairs.i])
                                      * (1 + n[pairs.j]))
            scale = np.dot(weights, np.abs(change) + gain + loss) + 4 * np.sum(traffic)
            self.assertLessEqual(abs(np.dot(weights, change)), 1e-12 * scale)

    def test_evolution_conserves(self):
        t_end = 20.0
        trajectory = kinetics.evolve(self.start, t_end, self.kernels, decay=False)
        totals = [obs.N_tot for obs in trajectory.observables]
        drift = max(abs(total - totals[0]) for total in totals) / totals[0]
        self.assertLessEqual(drift, 1e-6 * t_end / 1000.0)

    def test_pure_decay(self):
        kernels = Kernels(self.grid, None, None)
        start = KineticState(0.0, np.ones(self.N))
        lifetimes = self.grid.table.lifetime
        exact = np.exp(-40.0 / lifetimes)

        split = kinetics.evolve(start, 40.0, kernels)
        self.assertTrue(np.allclose(split.final.n, exact, rtol=1e-10, atol=0))
        unsplit = kinetics.evolve(start, 40.0, kernels, decay_splitting=False, rtol=1e-6,
                                  atol=1e-12)
        self.assertTrue(np.allclose(unsplit.final.n, exact, rtol=1e-4, atol=0))

    def test_outputs_and_counters(self):
        pump = PumpSpec(p0=1e-3, t0=10.0)
        trajectory = kinetics.evolve(kinetics.initial_state(self.grid), 35.0, self.kernels,
                                     pump=pump, output_every=10.0, snapshot_every=20.0)
        times = [obs.t for obs in trajectory.observables]
        self.assertEqual(times, [0.0, 10.0, 20.0, 30.0, 35.0])
        self.assertEqual(len(trajectory), 5)
        snapshot_times = [obs.t for obs in trajectory.snapshots]
        self.assertEqual(snapshot_times, [0.0, 20.0, 35.0])
        self.assertEqual(trajectory.final.t, 35.0)
        self.assertTrue(np.array_equal(trajectory.last.f_k, trajectory.final.n))
        self.assertTrue(np.all(trajectory.final.n >= 0))
        self.assertGreater(trajectory.last.N_tot, 0.0)

        counters = trajectory.counters
        attempts = counters['accepted'] + counters['rejected'] + counters['negative_rejected']
        self.assertGreater(counters['accepted'], 0)
        self.assertEqual(counters['rhs_evaluations'], 4 * attempts)
        self.assertGreaterEqual(trajectory.elapsed, 0.0)

    def test_splitting_agrees(self):
        pump = PumpSpec(p0=1e-3, t0=10.0)
        split = kinetics.evolve(kinetics.initial_state(self.grid), 30.0, self.kernels,
                                pump=pump, rtol=1e-6)
        unsplit = kinetics.evolve(kinetics.initial_state(self.grid), 30.0, self.kernels,
                                  pump=pump, rtol=1e-6, decay_splitting=False)
        self.assertAlmostEqual(split.last.N_tot / unsplit.last.N_tot, 1.0, places=3)

    def test_invalid_arguments(self):
        for kwargs in [{'t_end': 0.0}, {'t_end': 10.0, 'rtol': 0.1},
                       {'t_end': 10.0, 'output_every': 0.0}]:
            with self.assertRaises(ValueError):
                kinetics.evolve(self.start, kernels=self.kernels, **kwargs)

    def test_step_underflow(self):
        with self.assertRaises(NumericalError) as context:
            kinetics.evolve(self.start, 10.0, self.kernels, h0=1e-10)
        self.assertEqual(context.exception.t, 0.0)
        self.assertEqual(len(context.exception.state), self.N)


class TestAnalysis(unittest.TestCase):

    def test_stationary(self):
        flat = [Observables(float(t), 1.0, 5.0, 0.2, None) for t in range(0, 300, 10)]
        self.assertEqual(kinetics.detect_stationary(flat), (True, 200.0))
        self.assertEqual(kinetics.detect_stationary(flat[:15]), (False, None))

    def test_growing(self):
        growing = [Observables(float(t), math.exp(t / 50.0), 2 * math.exp(t / 50.0), 0.5, None)
                   for t in range(0, 600, 10)]
        self.assertEqual(kinetics.detect_stationary(growing), (False, None))
        # Growth that levels off becomes stationary
        levelling = [Observables(float(t), 1.0 - math.exp(-t / 20.0) + 1e-3, 1.0, 0.5, None)
                     for t in range(0, 600, 10)]
        stationary, time = kinetics.detect_stationary(levelling)
        self.assertTrue(stationary)
        self.assertGreater(time, 200.0)

    def test_vanishing(self):
        vanishing = [Observables(float(t), 1e-15 * math.exp(-t / 10.0),
                                 1e-15 * math.exp(-t / 10.0), 1.0, None)
                     for t in range(0, 300, 10)]
        self.assertEqual(kinetics.detect_stationary(vanishing), (True, 200.0))

    def test_observe(self):
        material = mat.MaterialSet()
        grid = grd.build_grid(material, mat.field_state(material, 0.0), N=16)
        n = np.zeros(16)
        n[0], n[3] = 2.0, 1.0
        obs = kinetics.observe(KineticState(5.0, n), grid)
        self.assertEqual(obs.t, 5.0)
        self.assertEqual(obs.n0, 2.0)
        self.assertAlmostEqual(obs.N_tot, 2.0 + grid.shell_weights[3])
        self.assertAlmostEqual(obs.ratio, 2.0 / obs.N_tot)
        self.assertIsNone(obs.f_k)
        self.assertEqual(kinetics.observe(KineticState(0.0, n), grid, True).f_k.tolist(),
                         n.tolist())
        self.assertEqual(kinetics.observe(kinetics.initial_state(grid), grid).ratio, 0.0)

    def test_bose_einstein_fit(self):
        kT = mat.KB_MEV_PER_K * 10.0
        E = np.linspace(0.0, 3.0, 12)
        n = 1.0 / np.expm1((E + 0.5) / kT)
        fit = kinetics.fit_bose_einstein(E, n)
        self.assertAlmostEqual(fit.temperature, 10.0, places=8)
        self.assertAlmostEqual(fit.mu, -0.5, places=8)
        self.assertLess(fit.residual, 1e-10)

        n_noisy = n.copy()
        n_noisy[0] = 1e6
        fit = kinetics.fit_bose_einstein(E, n_noisy, nodes=slice(1, None))
        self.assertAlmostEqual(fit.temperature, 10.0, places=8)

    def test_bose_einstein_errors(self):
        with self.assertRaises(ValueError):
            kinetics.fit_bose_einstein([0.0], [1.0])
        with self.assertRaises(ValueError):
            kinetics.fit_bose_einstein([0.0, 1.0], [1.0, 0.0])
        with self.assertRaises(ValueError):
            kinetics.fit_bose_einstein([0.0, 1.0, 2.0], [0.1, 0.2, 0.3])

    def test_bottleneck_ratio(self):
        self.assertEqual(kinetics.bottleneck_ratio([2.0, 1.0, 4.0, 3.0]), 2.0)
        self.assertEqual(kinetics.bottleneck_ratio([0.0, 1.0]), math.inf)


if __name__ == '__main__':
    unittest.main()
