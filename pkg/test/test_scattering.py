# Copyright: (C) 2026 The polariton developers
# License: GNU GPL version 3

import itertools
import math
import os
import shutil
import tempfile
import unittest
from collections import defaultdict

import numpy as np
from scipy import constants, integrate

from polariton import dispersion
from polariton import grid as grd
from polariton import material as mat
from polariton import scattering


def _quadrature_R(k, kp, k1, k2):
    # The q^2 integral with t = lo + (hi - lo)*(1 - cos(theta))/2, which
    # removes both endpoint singularities
    roots_a = ((k + k1)**2, (k - k1)**2)
    roots_b = ((kp + k2)**2, (kp - k2)**2)
    hi, lo = min(roots_a[0], roots_b[0]), max(roots_a[1], roots_b[1])
    top, bottom = max(roots_a[0], roots_b[0]), min(roots_a[1], roots_b[1])

    def integrand(theta):
        t = lo + 0.5 * (hi - lo) * (1 - math.cos(theta))
        return 1.0 / math.sqrt((top - t) * (t - bottom))

    value, _ = integrate.quad(integrand, 0.0, math.pi, epsabs=0.0, epsrel=1e-11, limit=200)
    return value


class TestFactors(unittest.TestCase):

    def test_form_factor(self):
        self.assertEqual(scattering.form_factor(0.0), 1.0)
        self.assertAlmostEqual(scattering.form_factor(2.0), 2.0**-1.5, places=15)
        values = scattering.form_factor(np.array([0.0, 1.0, 4.0]))
        self.assertTrue(np.all(np.diff(values) < 0))

    def test_confinement_factor(self):
        self.assertEqual(scattering.confinement_factor(0.0), 1.0)
        self.assertEqual(scattering.confinement_factor(2 * math.pi), 0.5)
        self.assertAlmostEqual(scattering.confinement_factor(math.pi), 8 / (3 * math.pi),
                               places=14)
        # Continuous through the removable pole
        near = scattering.confinement_factor(2 * math.pi + 1e-5)
        self.assertAlmostEqual(near, 0.5, places=5)

    def test_deformation_factor(self):
        self.assertAlmostEqual(scattering.deformation_factor(0.0), 7.0 - 2.7, places=14)
        self.assertLess(abs(scattering.deformation_factor(5.0)), 4.3)

    def test_bose_occupation(self):
        self.assertEqual(scattering.bose_occupation(1.0, 0.0), 0.0)
        self.assertEqual(scattering.bose_occupation(0.0, 4.0), 0.0)
        kT = mat.KB_MEV_PER_K * 4.0
        self.assertAlmostEqual(scattering.bose_occupation(kT * math.log(2), 4.0), 1.0,
                               places=12)
        self.assertEqual(scattering.bose_occupation(-1.0, 4.0),
                         scattering.bose_occupation(1.0, 4.0))

    def test_angle_cutoff(self):
        self.assertEqual(scattering.angle_cutoff(0.1, 0.1, 1.0), math.pi)
        self.assertEqual(scattering.angle_cutoff(0.1, 0.2, 0.05), 0.0)
        self.assertEqual(scattering.angle_cutoff(0.0, 0.2, 0.3), math.pi)
        self.assertEqual(scattering.angle_cutoff(0.0, 0.2, 0.1), 0.0)
        cutoff = scattering.angle_cutoff(0.1, 0.1, 0.1)
        self.assertAlmostEqual(cutoff, math.pi / 3, places=12)


class TestKinematicR(unittest.TestCase):

    SAMPLES = 50
    RELATIVE = 1e-4

    @classmethod
    def setUpClass(cls):
        rng = np.random.RandomState(7)
        cls.quadruples = []
        while len(cls.quadruples) < cls.SAMPLES:
            k, kp, k1, k2 = rng.uniform(0.005, 0.5, 4)
            hi = min((k + k1)**2, (kp + k2)**2)
            lo = max((k - k1)**2, (kp - k2)**2)
            top = max((k + k1)**2, (kp + k2)**2)
            bottom = min((k - k1)**2, (kp - k2)**2)
            scale = top - bottom
            if hi - lo > 1e-3 * scale and min(top - hi, lo - bottom) > 1e-3 * scale:
                cls.quadruples.append((k, kp, k1, k2))


    def test_empty_domain(self):
        self.assertEqual(scattering.kinematic_R(0.01, 0.3, 0.02, 0.05), 0.0)
        self.assertEqual(scattering.kinematic_R(0.01, 0.3, 0.02, 0.05, smear=1e-3), 0.0)

    def test_against_quadrature(self):
        for quadruple in self.quadruples:
            value = scattering.kinematic_R(*quadruple)
            expected = _quadrature_R(*quadruple)
            self.assertLessEqual(abs(value - expected), self.RELATIVE * expected,
                                 msg=repr(quadruple))

    def test_symmetry(self):
        for k, kp, k1, k2 in self.quadruples:
            value = scattering.kinematic_R(k, kp, k1, k2)
            self.assertEqual(scattering.kinematic_R(kp, k, k2, k1), value)
            self.assertEqual(scattering.kinematic_R(k1, k2, k, kp), value)

    def test_array_input(self):
        columns = np.array(self.quadruples).T
        values = scattering.kinematic_R(*columns)
        self.assertEqual(values.shape, (self.SAMPLES,))
        self.assertEqual(values[3], scattering.kinematic_R(*self.quadruples[3]))

    def test_coinciding_roots(self):
        self.assertEqual(scattering.kinematic_R(0.1, 0.1, 0.2, 0.2), math.inf)
        smeared = scattering.kinematic_R(0.1, 0.1, 0.2, 0.2, smear=1e-4)
        self.assertTrue(math.isfinite(smeared))
        self.assertGreater(smeared, 0.0)
        # Smearing does not touch well-separated roots
        k, kp, k1, k2 = self.quadruples[0]
        self.assertEqual(scattering.kinematic_R(k, kp, k1, k2, smear=1e-12),
                         scattering.kinematic_R(k, kp, k1, k2))

    def test_scaling(self):
        for k, kp, k1, k2 in self.quadruples[:10]:
            value = scattering.kinematic_R(k, kp, k1, k2)
            for factor in (0.5, 3.0):
                scaled = scattering.kinematic_R(factor * k, factor * kp, factor * k1, factor * k2)
                self.assertAlmostEqual(scaled * factor**2 / value, 1.0, places=10)


class TestPhononKernel(unittest.TestCase):

    N = 40
    RELATIVE = 1e-6

    @classmethod
    def setUpClass(cls):
        cls.material = mat.MaterialSet()
        cls.field = mat.field_state(cls.material, 2.0)
        cls.grid = grd.build_grid(cls.material, cls.field, N=cls.N)
        cls.kernel = scattering.build_phonon_kernel(cls.grid, cls.material, cls.field)
        i, j = np.nonzero(np.triu(cls.kernel.base))
        rng = np.random.RandomState(11)
        chosen = rng.choice(len(i), size=min(50, len(i)), replace=False)
        cls.pairs = list(zip(i[chosen].tolist(), j[chosen].tolist()))


    def test_shape(self):
        base = self.kernel.base
        self.assertEqual(len(self.kernel), self.N)
        self.assertTrue(np.array_equal(base, base.T))
        self.assertTrue(np.all(np.diag(base) == 0))
        self.assertTrue(np.all(base >= 0))
        self.assertGreater(self.kernel.nonzero, 20)

    def test_mismatched_field(self):
        other = mat.field_state(self.material, 3.0)
        with self.assertRaises(ValueError):
            scattering.build_phonon_kernel(self.grid, self.material, other)

    def test_pair_rate(self):
        for i, j in self.pairs[:10]:
            self.assertAlmostEqual(scattering.phonon_pair_rate(i, j, self.grid, self.material)
                                   / self.kernel.base[i, j], 1.0, places=12)
        with self.assertRaises(ValueError):
            scattering.phonon_pair_rate(3, 3, self.grid, self.material)

    def test_against_quadrature(self):
        k = self.grid.k_values
        for i, j in self.pairs:
            delta = abs(self.grid.energies[i] - self.grid.energies[j]) / (
                mat.HBAR_MEV_PS * self.material.sound_velocity * 1e-3)
            cutoff = scattering.angle_cutoff(k[i], k[j], delta)
            if k[i] == 0 or k[j] == 0:
                expected = scattering.phonon_angle_rate(i, j, 0.0, self.grid, self.material)
            else:
                def integrand(s):
                    return 2 * s * scattering.phonon_angle_rate(i, j, cutoff - s * s,
                                                                self.grid, self.material)

                value, _ = integrate.quad(integrand, 0.0, math.sqrt(cutoff), epsabs=0.0,
                                          epsrel=1e-12, limit=400)
                expected = value / math.pi
            self.assertLessEqual(abs(self.kernel.base[i, j] - expected),
                                 self.RELATIVE * expected, msg=repr((i, j)))

    def test_detailed_balance(self):
        kT = mat.KB_MEV_PER_K * self.material.temperature
        for i, j in self.pairs:
            upper, lower = (i, j) if self.grid.energies[i] > self.grid.energies[j] else (j, i)
            gap = self.grid.energies[upper] - self.grid.energies[lower]
            ratio = self.kernel.detailed_balance(upper, lower)
            self.assertLessEqual(abs(ratio / math.exp(gap / kT) - 1.0), 1e-10)

    def test_zero_temperature(self):
        energies = np.array([0.0, 1.0])
        base = np.array([[0.0, 2.0], [2.0, 0.0]])
        kernel = scattering.PhononKernel(base, energies, 0.0, np.ones(2))
        # Only emission from the upper node survives
        self.assertEqual(kernel.dressed.tolist(), [[0.0, 0.0], [2.0, 0.0]])


class TestPairChannels(unittest.TestCase):

    N = grd.MIN_NODES
    RELATIVE = 1e-6
    HBAR_MEV_PS = constants.hbar / constants.e * 1e15

    @classmethod
    def setUpClass(cls):
        cls.material = mat.MaterialSet()
        cls.field = mat.field_state(cls.material, 1.0)
        cls.grid = grd.build_grid(cls.material, cls.field, N=cls.N)
        cls.channels = scattering.build_pp_channels(cls.grid, cls.material, cls.field)


    def _reference_weight(self, i, j, l, m):
        # Built from the dispersion and material laws alone
        k = self.k
        smear = 0.25 * np.sum(self.k_dk[[i, j, l, m]])
        plus_a, minus_a = (k[i] + k[l])**2, (k[i] - k[l])**2
        plus_b, minus_b = (k[j] + k[m])**2, (k[j] - k[m])**2
        hi, lo = min(plus_a, plus_b), max(minus_a, minus_b)
        if hi < lo:
            return 0.0
        top, bottom = max(plus_a, plus_b), min(minus_a, minus_b)
        if min(top - lo, hi - bottom, top - hi, lo - bottom) > 10 * smear:
            overlap = _quadrature_R(k[i], k[j], k[l], k[m])
        else:
            overlap = scattering.kinematic_R(k[i], k[j], k[l], k[m], smear=smear)
        return (8.0 / self.HBAR_MEV_PS * self.matrix**2 / self.area**3
                * np.prod(self.x2[[i, j, l, m]]) * self.modes[i] * self.modes[j]
                * self.modes[l] * self.modes[m] / self.widths[m] * overlap)

    def test_exhaustive_loop(self):
        grid = self.grid
        k = self.k = grid.k_values
        self.E = dispersion.lower_polariton_offset(k, self.field)
        self.x2 = dispersion.hopfield_fractions(k, self.field)[0]
        self.matrix = mat.pp_matrix_element(self.field.B, self.material)
        self.area = self.material.area_nm2
        dk = np.gradient(k) * np.r_[0.5, np.ones(self.N - 2), 0.5]
        self.k_dk = k * dk
        self.modes = np.r_[1.0, self.area * self.k_dk[1:] / (2 * math.pi)]
        edges = np.concatenate(([self.E[0]], 0.5 * (self.E[1:] + self.E[:-1]),
                                [1.5 * self.E[-1] - 0.5 * self.E[-2]]))
        self.widths = np.diff(edges)

        expected = defaultdict(float)
        for i, j, l in itertools.product(range(self.N), repeat=3):
            target = grid.energies[i] + grid.energies[j] - grid.energies[l]
            m = int(grid.bin_energies(target))
            if m < 0 or (l == i and m == j) or (l == j and m == i):
                continue
            weight = self._reference_weight(i, j, l, m)
            if weight <= 0:
                continue
            pair_in, pair_out = tuple(sorted((i, j))), tuple(sorted((l, m)))
            key = pair_in + pair_out if pair_in <= pair_out else pair_out + pair_in
            expected[key] += weight / 8.0

        found = self.channels.as_dict()
        self.assertEqual(sorted(found), sorted(expected))
        for key, weight in expected.items():
            self.assertLessEqual(abs(found[key] / weight - 1.0), self.RELATIVE, msg=repr(key))

    def test_transition_weight(self):
        channel = next(iter(self.channels))
        weight = scattering.pp_transition_weight(channel.i, channel.j, channel.l, channel.m,
                                                 self.grid)
        self.assertGreater(weight, 0.0)
        self.assertTrue(math.isfinite(weight))

    def test_canonical(self):
        channels = self.channels
        self.assertGreater(len(channels), 0)
        self.assertTrue(np.all(channels.i <= channels.j))
        self.assertTrue(np.all(channels.l <= channels.m))
        before = (channels.i < channels.l) | ((channels.i == channels.l)
                                              & (channels.j < channels.m))
        self.assertTrue(np.all(before))
        self.assertTrue(np.all(channels.weight > 0))

    def test_energy_conservation(self):
        energies = self.grid.energies
        cells = self.grid.cell_energies
        for channel in self.channels:
            nodes = [channel.i, channel.j, channel.l, channel.m]
            balance = (energies[channel.i] + energies[channel.j] - energies[channel.l]
                       - energies[channel.m])
            self.assertLessEqual(abs(balance), max(cells[nodes]), msg=repr(channel))

    def test_clamps(self):
        self.assertEqual(sorted(self.channels.clamps), ['curvature_floor', 'kinematic_smear'])
        for count in self.channels.clamps.values():
            self.assertGreaterEqual(count, 0)
        self.assertEqual(self.channels.clamps['curvature_floor'], 0)

    def test_curvature_floor(self):
        floor = float(np.median(scattering.cell_curvatures(self.grid)))
        floored = scattering.build_pp_channels(self.grid, self.material, self.field,
                                               curvature_floor=floor)
        self.assertGreater(floored.clamps['curvature_floor'], 0)
        weights = floored.as_dict()
        unfloored = self.channels.as_dict()
        self.assertEqual(sorted(weights), sorted(unfloored))
        for key, weight in weights.items():
            self.assertLessEqual(weight, unfloored[key] * (1 + 1e-12), msg=repr(key))
        self.assertLess(sum(weights.values()), sum(unfloored.values()))

    def test_cell_curvatures(self):
        grid = self.grid
        curvature = scattering.cell_curvatures(grid)
        self.assertTrue(np.all(curvature > 0))
        # One mode per energy cell of the k = 0 node
        density = self.material.area_nm2 / (2 * math.pi * curvature)
        self.assertAlmostEqual(density[0] * grid.cell_energies[0], 1.0, places=12)
        self.assertTrue(np.allclose(density[1:] * grid.cell_energies[1:],
                                    grid.shell_weights[1:], rtol=1e-12, atol=0.0))


class TestFieldKernels(unittest.TestCase):

    FIELDS = (0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0)

    @classmethod
    def setUpClass(cls):
        cls.material = mat.MaterialSet()


    def _kernels(self, B, N):
        field = mat.field_state(self.material, B)
        grid = grd.build_grid(self.material, field, N=N)
        return (scattering.build_phonon_kernel(grid, self.material, field),
                scattering.build_pp_channels(grid, self.material, field))

    def test_finite(self):
        for B in self.FIELDS:
            phonons, pairs = self._kernels(B, grd.MIN_NODES)
            self.assertTrue(np.all(np.isfinite(phonons.base)), msg=repr(B))
            self.assertTrue(np.all(np.isfinite(phonons.dressed)), msg=repr(B))
            self.assertTrue(np.all(np.isfinite(pairs.weight)), msg=repr(B))
            self.assertGreater(len(pairs), 0, msg=repr(B))

    def test_heavier_exciton_thins_phonon_kernel(self):
        field = mat.field_state(self.material, 0.0)
        grid = grd.build_grid(self.material, field)
        zero = scattering.build_phonon_kernel(grid, self.material, field)
        field = mat.field_state(self.material, 4.0)
        grid = grd.build_grid(self.material, field)
        strong = scattering.build_phonon_kernel(grid, self.material, field)
        self.assertLess(strong.nonzero, zero.nonzero)


class TestKernelCache(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.material = mat.MaterialSet()
        cls.field = mat.field_state(cls.material, 0.0)
        cls.grid = grd.build_grid(cls.material, cls.field, N=20)

    def setUp(self):
        self.directory = tempfile.mkdtemp(prefix='polariton-test-')

    def tearDown(self):
        shutil.rmtree(self.directory)


    def test_pairs_round_trip(self):
        built = scattering.build_pp_channels(self.grid, self.material, self.field,
                                             cache_dir=self.directory)
        self.assertEqual(len(os.listdir(self.directory)), 1)
        loaded = scattering.build_pp_channels(self.grid, self.material, self.field,
                                              cache_dir=self.directory)
        self.assertEqual(loaded.key, built.key)
        self.assertEqual(loaded.clamps, built.clamps)
        for name in ('i', 'j', 'l', 'm', 'weight'):
            self.assertTrue(np.array_equal(getattr(loaded, name), getattr(built, name)))

    def test_phonon_round_trip(self):
        built = scattering.build_phonon_kernel(self.grid, self.material, self.field,
                                               cache_dir=self.directory)
        loaded = scattering.build_phonon_kernel(self.grid, self.material, self.field,
                                                cache_dir=self.directory)
        self.assertTrue(np.array_equal(loaded.base, built.base))
        self.assertTrue(np.array_equal(loaded.dressed, built.dressed))

    def test_mismatch(self):
        key = scattering.kernel_key('phonon', self.grid, nodes=32)
        other_key = scattering.kernel_key('phonon', self.grid, nodes=64)
        self.assertNotEqual(key, other_key)
        path = os.path.join(self.directory, 'kernel.plkc')
        arrays = [np.arange(6.0).reshape(2, 3), np.array([1, 2], dtype=np.int64)]
        scattering.write_kernel_file(path, 'phonon', key, arrays)

        read = scattering.read_kernel_file(path, 'phonon', key)
        self.assertTrue(np.array_equal(read[0], arrays[0]))
        self.assertTrue(np.array_equal(read[1], arrays[1]))
        self.assertIsNone(scattering.read_kernel_file(path, 'phonon', other_key))
        self.assertIsNone(scattering.read_kernel_file(path, 'pairs', key))
        self.assertIsNone(scattering.read_kernel_file(path + '.missing', 'phonon', key))

        with open(path, 'r+b') as stream:
            stream.write(b'XXXX')
        self.assertIsNone(scattering.read_kernel_file(path, 'phonon', key))


if __name__ == '__main__':
    unittest.main()
