# Copyright: (C) 2026 The polariton developers
# License: GNU GPL version 3

"""The module containing the KGrid class and its builder.

"""
import hashlib

import numpy as np

from polariton import dispersion
from polariton.error import NumericalError


SPACINGS = ('uniform-k', 'uniform-sqrt-k')
MIN_NODES = 16


class KGrid(object):
    """A radial wavenumber grid with the lower-polariton dispersion on it.

    Node 0 sits at k = 0 and is the single condensate mode; every other
    node stands for the ring of modes in its trapezoidal cell.

    Parameters
    ----------
    k_values : numpy.ndarray
        Ascending wavenumbers in 1/nm starting at 0.
    field : FieldState
        The field-dressed material the dispersion is tabulated for.
    spacing : str
        The spacing rule the nodes were built with.

    Attributes
    ----------
    k_values : numpy.ndarray
        Node wavenumbers in 1/nm.
    N : int
        The number of nodes.
    k_max : float
        The largest wavenumber in 1/nm.
    spacing : str
        One of `SPACINGS`.
    field : FieldState
        The field the grid was built for.
    material : MaterialSet
        The material of `field`.
    table : DispersionTable
        Dispersion arrays at the nodes (meV relative to the exciton line).
    energies : numpy.ndarray
        Lower-polariton energy of each node in meV (alias of
        `table.lower`).
    cell_widths : numpy.ndarray
        Trapezoidal cell width of each node in 1/nm.
    shell_weights : numpy.ndarray
        The number of modes each node stands for: 1 at k = 0, and
        S*k*dk/(2*pi) elsewhere.
    cell_edges : numpy.ndarray
        N + 1 energy-cell boundaries in meV: node i collects energies in
        (cell_edges[i], cell_edges[i+1]], node 0 also its lower edge.
    cell_energies : numpy.ndarray
        The width in meV of each energy cell.

    Raises
    ------
    NumericalError
        If the tabulated energies are not strictly increasing.

    """
    def __init__(self, k_values, field, spacing):
        self.k_values = np.asarray(k_values, dtype=float)
        self.N = len(self.k_values)
        self.k_max = float(self.k_values[-1])
        self.spacing = spacing
        self.field = field
        self.material = field.material

        self.table = dispersion.tabulate(self.k_values, field)
        self.energies = self.table.lower
        steps = np.diff(self.energies)
        if np.any(steps <= 0):
            bad = int(np.argmax(steps <= 0)) + 1
            raise NumericalError('tabulated lower-polariton energies are not strictly'
                                 ' increasing', node=bad)

        k = self.k_values
        widths = np.empty(self.N)
        widths[0] = 0.5 * (k[1] - k[0])
        widths[1:-1] = 0.5 * (k[2:] - k[:-2])
        widths[-1] = 0.5 * (k[-1] - k[-2])
        self.cell_widths = widths

        weights = self.material.area_nm2 * k * widths / (2 * np.pi)
        weights[0] = 1.0
        self.shell_weights = weights

        midpoints = 0.5 * (self.energies[1:] + self.energies[:-1])
        top = self.energies[-1] + 0.5 * (self.energies[-1] - self.energies[-2])
        self.cell_edges = np.concatenate(([self.energies[0]], midpoints, [top]))
        self.cell_energies = np.diff(self.cell_edges)

    def __len__(self):
        return self.N

    def __eq__(self, other):
        return (isinstance(other, KGrid) and self.field == other.field
                and self.spacing == other.spacing
                and np.array_equal(self.k_values, other.k_values))

    def __ne__(self, other):
        return not self == other

    def __hash__(self):
        return hash(self.content_hash())

    def __repr__(self):
        return 'KGrid(N={}, k_max={!r}, spacing={!r}, B={!r})'.format(
            self.N, self.k_max, self.spacing, self.field.B)


    def point(self, i):
        """Return the DispersionPoint of node `i`.

        """
        return dispersion.dispersion_point(self.k_values[i], self.field)

    @property
    def points(self):
        """A list of the DispersionPoint of every node."""
        return [self.point(i) for i in range(self.N)]

    def total(self, n):
        """Return the particle number sum(g_i*n_i) of occupations `n`.

        """
        return float(np.dot(self.shell_weights, n))


    def bin_energies(self, E):
        """Return the energy-cell index of each energy, or -1 if off the grid.

        Parameters
        ----------
        E : array_like
            Energies in meV relative to the exciton line.

        Returns
        -------
        numpy.ndarray of int
            For each energy, the node whose cell contains it; an energy
            exactly on a boundary goes to the lower node.

        """
        E = np.asarray(E, dtype=float)
        index = np.searchsorted(self.cell_edges, E, side='left') - 1
        index = np.where(E == self.cell_edges[0], 0, index)
        outside = (E < self.cell_edges[0]) | (E > self.cell_edges[-1]) | ~np.isfinite(E)
        return np.where(outside, -1, index)

    def nearest_energy_node(self, E):
        """Return the index of the node whose energy is nearest to E.

        Parameters
        ----------
        E : float
            An energy in meV relative to the exciton line.

        Returns
        -------
        int
            The node minimizing |E_i - E|; a tie goes to the lower index.

        Raises
        ------
        ValueError
            If E lies outside [energies[0], energies[-1]].

        """
        if not self.energies[0] <= E <= self.energies[-1]:
            raise ValueError('energy {!r} meV is outside the grid range [{!r}, {!r}]'.format(
                E, float(self.energies[0]), float(self.energies[-1])))
        return int(self.bin_energies(E))


    def content_hash(self):
        """Return a sha256 hex digest identifying the grid bit-for-bit.

        """
        digest = hashlib.sha256()
        digest.update(repr((self.spacing, tuple(self.field.material),
                            tuple(self.field[1:]))).encode('utf-8'))
        digest.update(self.k_values.tobytes())
        digest.update(self.energies.tobytes())
        return digest.hexdigest()


def node_wavenumbers(N, k_max, spacing='uniform-k'):
    """Return N ascending wavenumbers from 0 to k_max under a spacing rule.

    Examples
    --------
    >>> from polariton.grid import node_wavenumbers
    >>> node_wavenumbers(5, 0.4).tolist()
    [0.0, 0.1, 0.2, 0.30000000000000004, 0.4]
    >>> node_wavenumbers(5, 0.4, 'uniform-sqrt-k').tolist()
    [0.0, 0.025, 0.1, 0.225, 0.4]

    """
    if spacing not in SPACINGS:
        raise ValueError('spacing must be one of {}, not {!r}'.format(', '.join(SPACINGS),
                                                                      spacing))
    fractions = np.arange(N) / (N - 1)
    if spacing == 'uniform-sqrt-k':
        return k_max * fractions**2
    return k_max * fractions


def build_grid(material, field, N=150, k_max=0.5, spacing='uniform-k'):
    """Return the KGrid with N nodes up to k_max for the field state.

    Parameters
    ----------
    material : MaterialSet
        The material; must be the one `field` was derived from.
    field : FieldState
        The field state to tabulate the dispersion for.
    N : int, optional
        The number of nodes including k = 0 (default 150, minimum 16).
    k_max : float, optional
        The cutoff wavenumber in 1/nm (default 0.5).
    spacing : str, optional
        'uniform-k' (default) or 'uniform-sqrt-k', which crowds nodes into
        the steep photon-like region near k = 0.

    Raises
    ------
    ValueError
        If the arguments are out of range.
    NumericalError
        If the tabulated energies are not strictly increasing.

    """
    if N < MIN_NODES:
        raise ValueError('a grid needs at least {} nodes, not {}'.format(MIN_NODES, N))
    if not k_max > 0:
        raise ValueError('k_max must be positive, not {!r}'.format(k_max))
    if field.material != material:
        raise ValueError('field state was derived from a different material')
    return KGrid(node_wavenumbers(int(N), float(k_max), spacing), field, spacing)
