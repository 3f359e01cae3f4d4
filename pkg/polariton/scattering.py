# Copyright: (C) 2026 The polariton developers
# License: GNU GPL version 3

"""Polariton-phonon and polariton-polariton scattering kernels.

Both kernels are built once per grid and then read by the kinetics. The
phonon kernel holds the ring-averaged rate from one mode to another before
phonon Bose factors, and dresses it with absorption and emission factors
for a temperature. The pair kernel is a table of energy-conserving
channels (i, j) <-> (l, m), each stored once with a single weight that
serves both directions.

Examples
--------
>>> from polariton import scattering
>>> scattering.form_factor(0.0), scattering.confinement_factor(0.0)
(1.0, 1.0)
>>> scattering.confinement_factor(2 * 3.141592653589793)
0.5
>>> scattering.kinematic_R(0.01, 0.3, 0.02, 0.05)
0.0

"""
import hashlib
import os
import struct
import tempfile
from collections import namedtuple

import numpy as np
from numpy.polynomial import legendre
from scipy import constants, special

from polariton import material as mat


# Relative agreement at which doubling the angular nodes stops
ANGULAR_RTOL = 1e-10
MAX_ANGULAR_NODES = 1024

CACHE_MAGIC = b'PLKC'
CACHE_VERSION = 2


def form_factor(x):
    """Return the exciton envelope factor [1 + (x/2)^2]^(-3/2).

    `x` is the product of a wavenumber and the Bohr radius.

    """
    value = (1.0 + 0.25 * np.square(x))**-1.5
    return float(value) if np.ndim(x) == 0 else value


def confinement_factor(x):
    """Return the quantum-well overlap factor for x = L_z*q_z.

    8*pi^2*sin(x/2) / (x*(4*pi^2 - x^2)), continued to 1 at x = 0 and to
    1/2 at x = 2*pi.

    """
    x_arr = np.abs(np.asarray(x, dtype=float))
    near_pole = np.abs(x_arr - 2 * np.pi) < 1e-6
    safe = np.where(near_pole, 0.0, x_arr)
    # np.sinc(y) = sin(pi*y)/(pi*y) handles x = 0
    value = 4 * np.pi**2 * np.sinc(safe / (2 * np.pi)) / (4 * np.pi**2 - safe**2)
    value = np.where(near_pole, 0.5, value)
    return float(value) if np.ndim(x) == 0 else value


def deformation_factor(q, material=None):
    """Return D(q) = d_e*F(q*m_h/M) - d_h*F(q*m_e/M) in eV.

    Parameters
    ----------
    q : float or array_like
        In-plane momentum transfer in 1/nm.
    material : MaterialSet, optional
        The material (default the package defaults).

    """
    material = mat.DEFAULT_MATERIAL if material is None else material
    total = material.exciton_mass
    a0 = material.bohr_radius
    q = np.asarray(q, dtype=float)
    value = (material.deformation_potential_e * form_factor(q * a0 * material.hole_mass / total)
             - material.deformation_potential_h
             * form_factor(q * a0 * material.electron_mass / total))
    return float(value) if np.ndim(q) == 0 else value


def bose_occupation(dE, temperature):
    """Return the phonon occupation 1/(exp(dE/kT) - 1) for |dE| in meV.

    Zero at T = 0 and for vanishing dE.

    """
    dE = np.abs(np.asarray(dE, dtype=float))
    if temperature <= 0:
        value = np.zeros_like(dE)
    else:
        x = dE / (mat.KB_MEV_PER_K * temperature)
        with np.errstate(divide='ignore', over='ignore'):
            value = np.where(x > 0, 1.0 / np.expm1(np.where(x > 0, x, 1.0)), 0.0)
    return float(value) if value.ndim == 0 else value


def _sound_wavenumber(dE, material):
    # The phonon wavenumber |dE|/(hbar*u) in 1/nm; u in m/s is 1e-3 nm/ps
    return np.abs(dE) / (mat.HBAR_MEV_PS * material.sound_velocity * 1e-3)


def _phonon_prefactor(material):
    # e^2/(hbar*rho*S*u^2) in SI, i.e. L_z/(hbar*rho*V*u^2) with V = S*L_z,
    # times the conversions for Delta^2/q_z in 1/nm and a rate in 1/ps
    area = material.qw_area * 1e-12
    return (constants.e**2 / (constants.hbar * material.mass_density * area
                              * material.sound_velocity**2) * 1e9 * 1e-12)


def angle_cutoff(k_i, k_j, delta):
    """Return the largest ring angle at which a phonon of wavenumber delta fits.

    The in-plane transfer |k_i - k_j| must stay below delta; the returned
    angle is pi when every angle is allowed and 0 when none is.

    """
    k_i, k_j, delta = np.broadcast_arrays(*(np.asarray(v, dtype=float)
                                            for v in (k_i, k_j, delta)))
    with np.errstate(divide='ignore', invalid='ignore'):
        cos_min = (k_i**2 + k_j**2 - delta**2) / (2 * k_i * k_j)
    cutoff = np.arccos(np.clip(cos_min, -1.0, 1.0))
    cutoff = np.where(cos_min >= 1, 0.0, cutoff)
    # A ring at k = 0 has no angle to integrate over
    point = (k_i == 0) | (k_j == 0)
    cutoff = np.where(point, np.where(np.abs(k_i - k_j) < delta, np.pi, 0.0), cutoff)
    return float(cutoff) if cutoff.ndim == 0 else cutoff


def _transfer_rates(prefactor, delta, q2, material):
    # The unaveraged rate at in-plane transfer^2 q2 for phonon wavenumber delta
    qz = np.sqrt(np.maximum(delta * delta - q2, 0.0))
    with np.errstate(divide='ignore', invalid='ignore'):
        rate = (prefactor * delta * delta / qz
                * confinement_factor(material.qw_thickness * qz)**2
                * deformation_factor(np.sqrt(q2), material)**2)
    return np.where(delta * delta > q2, rate, 0.0)


def _pair_arrays(i, j, grid, material):
    # Per-pair prefactor and phonon wavenumber for index arrays
    x2 = grid.table.x2
    prefactor = _phonon_prefactor(material) * x2[i] * x2[j]
    delta = _sound_wavenumber(grid.energies[i] - grid.energies[j], material)
    return prefactor, delta


def phonon_angle_rate(i, j, phi, grid, material):
    """Return the rate in 1/ps from node i to node j at ring angle phi.

    This is the rate before the ring average and before phonon Bose
    factors; it is zero where the phonon cannot carry the in-plane
    transfer, and it diverges like 1/sqrt at the cutoff angle.

    """
    prefactor, delta = _pair_arrays(i, j, grid, material)
    k_i, k_j = grid.k_values[i], grid.k_values[j]
    phi = np.asarray(phi, dtype=float)
    q2 = k_i**2 + k_j**2 - 2 * k_i * k_j * np.cos(phi)
    rate = _transfer_rates(prefactor, delta, q2, material) if i != j else np.zeros_like(phi)
    return float(rate) if rate.ndim == 0 else rate


def _ring_average(k_i, k_j, prefactor, delta, material, nodes):
    # (1/pi) * integral over [0, cutoff] of the rate, with phi = cutoff - s^2
    # to absorb the inverse-square-root divergence at the cutoff. The node
    # count doubles for every pair whose estimate has not settled.
    cutoff = angle_cutoff(k_i, k_j, delta)
    result = np.zeros(len(k_i))

    point = ((k_i == 0) | (k_j == 0)) & (cutoff > 0)
    if np.any(point):
        q2 = (k_i[point] + k_j[point])**2
        result[point] = _transfer_rates(prefactor[point], delta[point], q2, material)

    todo = np.flatnonzero((cutoff > 0) & ~point)

    def estimate(index, count):
        x, w = legendre.leggauss(count)
        root = np.sqrt(cutoff[index])[:, None]
        s = 0.5 * root * (x + 1.0)
        phi = cutoff[index][:, None] - s * s
        ki, kj = k_i[index][:, None], k_j[index][:, None]
        q2 = np.maximum(ki * ki + kj * kj - 2 * ki * kj * np.cos(phi), 0.0)
        rates = _transfer_rates(prefactor[index][:, None], delta[index][:, None], q2, material)
        return (0.5 * root[:, 0]) * np.dot(rates * 2 * s, w) / np.pi

    count = nodes
    coarse = estimate(todo, count)
    while len(todo):
        fine = estimate(todo, 2 * count)
        result[todo] = fine
        settled = np.abs(fine - coarse) <= ANGULAR_RTOL * np.abs(fine)
        count *= 2
        if 2 * count > MAX_ANGULAR_NODES:
            break
        todo, coarse = todo[~settled], fine[~settled]
    return result


def phonon_pair_rate(i, j, grid, material, nodes=32):
    """Return the ring-averaged phonon rate in 1/ps from a mode of i to one of j.

    Parameters
    ----------
    i, j : int
        Distinct node indices.
    grid : KGrid
        The grid.
    material : MaterialSet
        The material.
    nodes : int, optional
        The starting number of Gauss-Legendre angle nodes (default 32).

    Returns
    -------
    float
        The base rate before phonon Bose factors; zero when the phonon
        wavenumber |E_i - E_j|/(hbar*u) does not exceed |k_i - k_j|.

    """
    if i == j:
        raise ValueError('a phonon rate needs two distinct nodes')
    index_i, index_j = np.array([i]), np.array([j])
    prefactor, delta = _pair_arrays(index_i, index_j, grid, material)
    return float(_ring_average(grid.k_values[index_i], grid.k_values[index_j], prefactor,
                               delta, material, nodes)[0])


class PhononKernel(object):
    """The phonon transition rates between the nodes of a grid.

    Parameters
    ----------
    base : numpy.ndarray
        Symmetric N x N matrix of per-mode rates in 1/ps before phonon
        Bose factors, with a zero diagonal.
    energies : numpy.ndarray
        Node energies in meV.
    temperature : float
        Lattice temperature in K.
    shell_weights : numpy.ndarray
        The number of modes of each node.
    key : str, optional
        The content hash the kernel was built for.

    Attributes
    ----------
    base : numpy.ndarray
        As given.
    dressed : numpy.ndarray
        dressed[i, j] is the rate from a mode of i into a mode of j per unit
        of n_i*(1 + n_j): base*(1 + N) going down in energy (emission) and
        base*N going up (absorption), N being the phonon occupation at
        |E_i - E_j|.
    temperature : float
        As given.
    shell_weights : numpy.ndarray
        As given.
    key : str
        As given, or None.

    """
    def __init__(self, base, energies, temperature, shell_weights, key=None):
        self.base = np.asarray(base, dtype=float)
        self.shell_weights = np.asarray(shell_weights, dtype=float)
        self.temperature = float(temperature)
        self.key = key
        gap = energies[:, None] - energies[None, :]
        phonons = bose_occupation(gap, temperature)
        self.dressed = self.base * np.where(gap > 0, 1.0 + phonons, phonons)

    def __len__(self):
        return len(self.base)

    @property
    def nonzero(self):
        """The number of node pairs with a nonzero base rate."""
        return int(np.count_nonzero(self.base))

    def detailed_balance(self, i, j):
        """Return dressed[i, j]/dressed[j, i] for a pair with rates both ways.

        """
        return self.dressed[i, j] / self.dressed[j, i]


def build_phonon_kernel(grid, material, field, nodes=32, cache_dir=None):
    """Return the PhononKernel of the grid at the material temperature.

    Parameters
    ----------
    grid : KGrid
        The grid, built for `field`.
    material : MaterialSet
        The material.
    field : FieldState
        The field state of the grid.
    nodes : int, optional
        The starting number of angle nodes per pair (default 32).
    cache_dir : str, optional
        A directory for the kernel cache (default None, no caching).

    """
    if grid.field != field or field.material != material:
        raise ValueError('grid, field state, and material do not belong together')
    key = kernel_key('phonon', grid, nodes=nodes)
    cached = _load_cached(cache_dir, 'phonon', key)
    if cached is not None:
        return PhononKernel(cached[0], grid.energies, material.temperature,
                            grid.shell_weights, key=key)

    upper_i, upper_j = np.triu_indices(grid.N, k=1)
    prefactor, delta = _pair_arrays(upper_i, upper_j, grid, material)
    rates = _ring_average(grid.k_values[upper_i], grid.k_values[upper_j], prefactor, delta,
                          material, nodes)
    base = np.zeros((grid.N, grid.N))
    base[upper_i, upper_j] = rates
    base[upper_j, upper_i] = rates

    _store_cached(cache_dir, 'phonon', key, [base])
    return PhononKernel(base, grid.energies, material.temperature, grid.shell_weights, key=key)


def kinematic_R(k, kp, k1, k2, smear=0.0):
    """Return the angular momentum-conservation factor of a scattering event.

    The integral over q^2 of
    1/sqrt([(k+k1)^2 - q^2][q^2 - (k-k1)^2][(kp+k2)^2 - q^2][q^2 - (kp-k2)^2])
    over the interval where all four brackets are positive, evaluated in
    closed form as a complete elliptic integral.

    Parameters
    ----------
    k, kp, k1, k2 : float or array_like
        Wavenumbers in 1/nm; (k, k1) and (kp, k2) are the two pairs that
        share a momentum transfer.
    smear : float or array_like, optional
        A floor in nm^-2 for the gaps between the four roots (default 0).
        Coinciding roots make the integral diverge logarithmically; a
        positive floor replaces the divergence by a finite value.

    Returns
    -------
    float or numpy.ndarray
        The value in nm^2; zero when the domain is empty, inf for
        coinciding roots without smearing.

    """
    k, kp, k1, k2, smear = np.broadcast_arrays(*(np.asarray(v, dtype=float)
                                                 for v in (k, kp, k1, k2, smear)))
    plus_a, minus_a = (k + k1)**2, (k - k1)**2
    plus_b, minus_b = (kp + k2)**2, (kp - k2)**2
    hi = np.minimum(plus_a, plus_b)
    lo = np.maximum(minus_a, minus_b)
    top = np.maximum(plus_a, plus_b)
    bottom = np.minimum(minus_a, minus_b)
    allowed = hi >= lo

    span_top = np.maximum(top - lo, smear)
    span_bottom = np.maximum(hi - bottom, smear)
    gap_top = np.maximum(top - hi, smear)
    gap_bottom = np.maximum(lo - bottom, smear)
    spans = span_top * span_bottom
    with np.errstate(divide='ignore', invalid='ignore'):
        complement = np.clip(gap_top * gap_bottom / spans, 0.0, 1.0)
        value = 2.0 * special.ellipkm1(complement) / np.sqrt(spans)
    value = np.where(allowed & (spans > 0), value, 0.0)
    return float(value) if value.ndim == 0 else value


PairChannel = namedtuple('PairChannel', ['i', 'j', 'l', 'm', 'weight'])
PairChannel.__doc__ = """One pair-scattering channel (i, j) <-> (l, m).

The weight, in 1/ps, multiplies n_i*n_j*(1+n_l)*(1+n_m) -
n_l*n_m*(1+n_i)*(1+n_j) to give the number of events per unit time.

"""


class PairChannels(object):
    """A table of pair-scattering channels stored as parallel arrays.

    Channels are canonical: i <= j, l <= m, and (i, j) precedes (l, m), so
    each unordered exchange appears once.

    Parameters
    ----------
    i, j, l, m : numpy.ndarray of int
        Node indices.
    weight : numpy.ndarray
        Channel weights in 1/ps.
    shell_weights : numpy.ndarray
        The number of modes of each grid node.
    clamps : dict of str to int, optional
        Counts of regularized events: 'curvature_floor' and
        'kinematic_smear' (default zeros).
    key : str, optional
        The content hash the table was built for.

    """
    def __init__(self, i, j, l, m, weight, shell_weights, clamps=None, key=None):
        self.i = np.asarray(i, dtype=np.int64)
        self.j = np.asarray(j, dtype=np.int64)
        self.l = np.asarray(l, dtype=np.int64)
        self.m = np.asarray(m, dtype=np.int64)
        self.weight = np.asarray(weight, dtype=float)
        self.shell_weights = np.asarray(shell_weights, dtype=float)
        self.N = len(self.shell_weights)
        self.clamps = dict(clamps or {'curvature_floor': 0, 'kinematic_smear': 0})
        self.key = key

    def __len__(self):
        return len(self.weight)

    def __iter__(self):
        for row in zip(self.i.tolist(), self.j.tolist(), self.l.tolist(), self.m.tolist(),
                       self.weight.tolist()):
            yield PairChannel(*row)

    def as_dict(self):
        """Return a dict of (i, j, l, m) to weight."""
        return {(c.i, c.j, c.l, c.m): c.weight for c in self}


def _canonical(i, j, l, m):
    a, b = np.minimum(i, j), np.maximum(i, j)
    c, d = np.minimum(l, m), np.maximum(l, m)
    swap = (a > c) | ((a == c) & (b > d))
    return (np.where(swap, c, a), np.where(swap, d, b),
            np.where(swap, a, c), np.where(swap, b, d))


def cell_curvatures(grid):
    """Return the curvature in meV nm^2 of the dispersion over each grid cell.

    For k > 0 this is (1/k)*dE/dk taken over the cell, the energy width
    over k*dk, which equals d2E/dk2 on a parabolic branch and turns the
    S/(2*pi) modes per unit k*dk into modes per meV. The k = 0 cell
    holds the single condensate mode, so its value is the one that gives
    it one mode over its energy width.

    """
    k_dk = grid.k_values * grid.cell_widths
    curvature = np.empty(grid.N)
    curvature[1:] = grid.cell_energies[1:] / k_dk[1:]
    curvature[0] = grid.material.area_nm2 * grid.cell_energies[0] / (2 * np.pi)
    return curvature


def kinematic_smear(i, j, l, m, grid):
    """Return the root-gap floor used for a channel: the mean k*dk of its nodes.

    """
    k_dk = grid.k_values * grid.cell_widths
    return 0.25 * (k_dk[i] + k_dk[j] + k_dk[l] + k_dk[m])


def _transition_weights(i, j, l, m, grid, curvature_floor):
    # g_i times the per-mode rate
    # 8/hbar * |M|^2 x_i^2 x_j^2 x_l^2 x_m^2 dE_j dE_l (S/2pi)^3 R / (c_j c_l c_m)
    # with the curvatures c floored
    x2 = grid.table.x2
    matrix = grid.field.pp_matrix_element
    area = grid.material.area_nm2
    k = grid.k_values
    widths = grid.cell_energies

    curvature = cell_curvatures(grid)
    floored = curvature < curvature_floor
    density = area / (2 * np.pi * np.maximum(curvature, curvature_floor))
    clamped = floored[j] | floored[l] | floored[m]

    smear = kinematic_smear(i, j, l, m, grid)
    exact = kinematic_R(k[i], k[j], k[l], k[m])
    overlap = kinematic_R(k[i], k[j], k[l], k[m], smear=smear)
    smeared = overlap != exact
    weight = (8.0 / mat.HBAR_MEV_PS * matrix * matrix / area**3
              * x2[i] * x2[j] * x2[l] * x2[m] * grid.shell_weights[i]
              * widths[j] * widths[l] * density[j] * density[l] * density[m] * overlap)
    return weight, clamped, smeared


def pp_transition_weight(i, j, l, m, grid, curvature_floor=1e-6):
    """Return the events per unit time of (i, j) -> (l, m) with m solved by energy.

    The rate of all mode quadruples with modes in the four cells, for
    occupation factor one, where the final state m absorbs the energy
    balance through its density of states.

    Parameters
    ----------
    i, j, l, m : int
        Node indices.
    grid : KGrid
        The grid, carrying the field state and its matrix element.
    curvature_floor : float, optional
        The lower bound in meV nm^2 on the curvatures entering the state
        densities of j, l, and m (default 1e-6).

    Returns
    -------
    float
        The weight in 1/ps.

    """
    weight, _, _ = _transition_weights(np.array([i]), np.array([j]), np.array([l]),
                                       np.array([m]), grid, curvature_floor)
    return float(weight[0])


def build_pp_channels(grid, material, field, curvature_floor=1e-6, cache_dir=None):
    """Return the PairChannels of the grid.

    Every ordered triple (i, j, l) fixes the target energy
    E_i + E_j - E_l, which is binned to the node m whose energy cell holds
    it. Each such discovery adds an eighth of its transition weight to the
    canonical channel, so a channel found from all eight of its orderings
    carries the full weight.

    Parameters
    ----------
    grid : KGrid
        The grid, built for `field`.
    material : MaterialSet
        The material.
    field : FieldState
        The field state supplying the matrix element.
    curvature_floor : float, optional
        The curvature floor in meV nm^2 (default 1e-6).
    cache_dir : str, optional
        A directory for the kernel cache (default None, no caching).

    """
    if grid.field != field or field.material != material:
        raise ValueError('grid, field state, and material do not belong together')
    N = grid.N
    key = kernel_key('pairs', grid, curvature_floor=curvature_floor)
    cached = _load_cached(cache_dir, 'pairs', key)
    if cached is not None:
        indices, weight, counts = cached
        clamps = {'curvature_floor': int(counts[0]), 'kinematic_smear': int(counts[1])}
        return PairChannels(*indices, weight=weight, shell_weights=grid.shell_weights,
                            clamps=clamps, key=key)

    codes, weights = [], []
    clamps = {'curvature_floor': 0, 'kinematic_smear': 0}
    j_all, l_all = (a.ravel() for a in np.meshgrid(np.arange(N), np.arange(N), indexing='ij'))
    for i in range(N):
        target = grid.energies[i] + grid.energies[j_all] - grid.energies[l_all]
        m_all = grid.bin_energies(target)
        trivial = ((l_all == i) & (m_all == j_all)) | ((l_all == j_all) & (m_all == i))
        keep = (m_all >= 0) & ~trivial
        j, l, m = j_all[keep], l_all[keep], m_all[keep]
        i_arr = np.full(len(j), i)
        weight, clamped, smeared = _transition_weights(i_arr, j, l, m, grid, curvature_floor)
        found = weight > 0
        clamps['curvature_floor'] += int(np.count_nonzero(clamped & found))
        clamps['kinematic_smear'] += int(np.count_nonzero(smeared & found))
        a, b, c, d = _canonical(i_arr[found], j[found], l[found], m[found])
        codes.append(((a * N + b) * N + c) * N + d)
        weights.append(weight[found] / 8.0)

    codes = np.concatenate(codes) if codes else np.zeros(0, dtype=np.int64)
    weights = np.concatenate(weights) if weights else np.zeros(0)
    unique, inverse = np.unique(codes, return_inverse=True)
    total = np.bincount(inverse.ravel(), weights=weights, minlength=len(unique))
    d = unique % N
    c = unique // N % N
    b = unique // N**2 % N
    a = unique // N**3

    counts = np.array([clamps['curvature_floor'], clamps['kinematic_smear']], dtype=np.int64)
    _store_cached(cache_dir, 'pairs', key, [np.stack([a, b, c, d]), total, counts])
    return PairChannels(a, b, c, d, total, grid.shell_weights, clamps=clamps, key=key)


def kernel_key(kind, grid, **params):
    """Return the sha256 hex digest naming a kernel of a grid.

    The grid hash covers the material, field, and node positions; `params`
    adds the build settings.

    """
    digest = hashlib.sha256()
    digest.update(kind.encode('utf-8'))
    digest.update(grid.content_hash().encode('ascii'))
    digest.update(repr(sorted(params.items())).encode('utf-8'))
    return digest.hexdigest()


def _cache_path(cache_dir, kind, key):
    return os.path.join(cache_dir, '{}-{}.plkc'.format(kind, key[:32]))


def write_kernel_file(path, kind, key, arrays):
    """Write arrays to a kernel cache file, replacing it atomically.

    The layout is the magic bytes, the format version, the kind padded to
    8 bytes, the 32-byte digest `key`, the array count, and then for every
    array its dtype code, rank, shape, and row-major bytes.

    """
    header = CACHE_MAGIC + struct.pack('<I8s32sI', CACHE_VERSION, kind.encode('ascii'),
                                       bytes.fromhex(key), len(arrays))
    directory = os.path.dirname(os.path.abspath(path))
    handle, temp_path = tempfile.mkstemp(dir=directory, suffix='.tmp')
    try:
        with os.fdopen(handle, 'wb') as stream:
            stream.write(header)
            for array in arrays:
                array = np.ascontiguousarray(array)
                code = b'f' if array.dtype.kind == 'f' else b'i'
                array = array.astype('<f8' if code == b'f' else '<i8')
                stream.write(code + struct.pack('<I', array.ndim))
                stream.write(struct.pack('<{}Q'.format(array.ndim), *array.shape))
                stream.write(array.tobytes())
        os.replace(temp_path, path)
    except BaseException:
        os.unlink(temp_path)
        raise


def read_kernel_file(path, kind, key):
    """Return the arrays of a kernel cache file, or None if it does not match.

    A file whose magic, version, kind, or digest differs from the request
    is treated as absent.

    """
    try:
        with open(path, 'rb') as stream:
            data = stream.read()
    except OSError:
        return None
    head = len(CACHE_MAGIC) + struct.calcsize('<I8s32sI')
    if len(data) < head or not data.startswith(CACHE_MAGIC):
        return None
    version, stored_kind, digest, count = struct.unpack_from('<I8s32sI', data,
                                                             len(CACHE_MAGIC))
    if (version != CACHE_VERSION or stored_kind.rstrip(b'\0') != kind.encode('ascii')
            or digest != bytes.fromhex(key)):
        return None

    arrays, offset = [], head
    for _ in range(count):
        code = data[offset:offset + 1]
        ndim, = struct.unpack_from('<I', data, offset + 1)
        shape = struct.unpack_from('<{}Q'.format(ndim), data, offset + 5)
        offset += 5 + 8 * ndim
        size = int(np.prod(shape)) if ndim else 1
        dtype = '<f8' if code == b'f' else '<i8'
        arrays.append(np.frombuffer(data, dtype=dtype, count=size,
                                    offset=offset).reshape(shape).copy())
        offset += 8 * size
    return arrays


def _load_cached(cache_dir, kind, key):
    if not cache_dir:
        return None
    return read_kernel_file(_cache_path(cache_dir, kind, key), kind, key)


def _store_cached(cache_dir, kind, key, arrays):
    if cache_dir:
        os.makedirs(cache_dir, exist_ok=True)
        write_kernel_file(_cache_path(cache_dir, kind, key), kind, key, arrays)
