# Copyright: (C) 2026 The polariton developers
# License: GNU GPL version 3

"""The Boltzmann equations of the lower-polariton occupations and their integrator.

Every node i carries one occupation n_i per mode. Its rate of change is the
pump, minus the decay n_i/tau_i, plus the phonon and pair collision terms.

Examples
--------
>>> from polariton.kinetics import PumpSpec, detect_stationary, Observables
>>> PumpSpec()
PumpSpec(p0=0.001, k_p=0.02, Gamma=0.5, t0=50.0)
>>> flat = [Observables(t, 1.0, 5.0, 0.2, None) for t in range(0, 300, 10)]
>>> detect_stationary(flat, window=200, eps=0.02)
Stationarity(stationary=True, time=200.0)

"""
import math
import time
from collections import namedtuple

import numpy as np

from polariton import dispersion, scattering
from polariton import material as mat
from polariton.error import NumericalError


# Bogacki-Shampine 3(2): stage times, stage rows, and the difference of the
# third- and second-order weights for the error estimate
_STAGES = [0.0, 1 / 2, 3 / 4, 1.0]
_TABLEAU = {
    1: [1 / 2],
    2: [0.0, 3 / 4],
    3: [2 / 9, 1 / 3, 4 / 9],
}
_ERROR = [-5 / 72, 1 / 12, 1 / 9, -1 / 8]
_ORDER = 3

SAFETY = 0.9
MIN_FACTOR, MAX_FACTOR = 0.2, 5.0
MIN_STEP = 1e-9
# Occupations between -NEGATIVE_FLOOR and 0 are set to 0; below it the step
# is rejected
NEGATIVE_FLOOR = 1e-14
STATIONARY_FLOOR = 1e-9


class PumpSpec(namedtuple('PumpSpec', ['p0', 'k_p', 'Gamma', 't0'])):
    """A quasi-stationary pump switched on with tanh(t/t0).

    Parameters
    ----------
    p0 : float, optional
        Peak rate per mode in 1/ps (default 1e-3).
    k_p : float, optional
        The wavenumber in 1/nm at whose energy the pump is centered
        (default 0.02).
    Gamma : float, optional
        The energy width in meV (default 0.5).
    t0 : float, optional
        The switch-on time in ps (default 50).

    Raises
    ------
    ValueError
        If p0 or k_p is negative, or Gamma or t0 is not positive.

    """
    __slots__ = ()

    def __new__(cls, p0=1e-3, k_p=0.02, Gamma=0.5, t0=50.0):
        self = super(PumpSpec, cls).__new__(cls, float(p0), float(k_p), float(Gamma),
                                            float(t0))
        if not self.p0 >= 0:
            raise ValueError('pump p0 must not be negative')
        if not self.k_p >= 0:
            raise ValueError('pump k_p must not be negative')
        if not (self.Gamma > 0 and self.t0 > 0):
            raise ValueError('pump Gamma and t0 must be positive')
        return self


KineticState = namedtuple('KineticState', ['t', 'n'])
KineticState.__doc__ = """Occupations n (one per node, n[0] the condensate) at time t in ps."""

Observables = namedtuple('Observables', ['t', 'n0', 'N_tot', 'ratio', 'f_k'])
Observables.__doc__ = """A trajectory sample.

Fields: t (ps), n0 (condensate occupation), N_tot (sum of g_i*n_i), ratio
(n0/N_tot), and f_k (the occupation of every node, or None on rows that
are not snapshots).

"""

Kernels = namedtuple('Kernels', ['grid', 'phonon', 'pairs'])
Kernels.__doc__ = """The grid with its PhononKernel and PairChannels (either may be None)."""

Stationarity = namedtuple('Stationarity', ['stationary', 'time'])

BoseEinsteinFit = namedtuple('BoseEinsteinFit', ['temperature', 'mu', 'residual'])
BoseEinsteinFit.__doc__ = """A Bose-Einstein fit: temperature (K), chemical
potential mu (meV), and the RMS deviation in log occupancy."""


def build_kernels(grid, material, field, pp=True, pph=True, angular_nodes=32,
                  curvature_floor=1e-6, cache_dir=None):
    """Return the Kernels of a grid, building only the enabled collision terms.

    """
    phonon = (scattering.build_phonon_kernel(grid, material, field, nodes=angular_nodes,
                                             cache_dir=cache_dir) if pph else None)
    pairs = (scattering.build_pp_channels(grid, material, field,
                                          curvature_floor=curvature_floor,
                                          cache_dir=cache_dir) if pp else None)
    return Kernels(grid, phonon, pairs)


def initial_state(grid):
    """Return the empty KineticState at t = 0."""
    return KineticState(0.0, np.zeros(grid.N))


def pump_profile(spec, grid):
    """Return p0 times the Gaussian energy envelope of the pump at every node.

    """
    center = dispersion.lower_polariton_offset(spec.k_p, grid.field)
    return spec.p0 * np.exp(-0.5 * ((grid.energies - center) / spec.Gamma)**2)


def pump_rate(node, t, spec, grid):
    """Return the pump rate in 1/ps into a mode of a node at time t.

    p0*exp(-((E - E(k_p))/Gamma)^2/2)*tanh(t/t0).

    Raises
    ------
    ValueError
        If t is negative.

    """
    if t < 0:
        raise ValueError('pump time must not be negative, not {!r}'.format(t))
    return float(pump_profile(spec, grid)[node] * math.tanh(t / spec.t0))


def pph_rates(state, kernel):
    """Return the phonon gain and loss rates (gain, loss) of every node.

    The gain of node i carries the stimulation factor (1 + n_i); it is
    the only place n_i enters it.

    """
    n = state.n
    g = kernel.shell_weights
    rates = kernel.dressed
    gain = (1.0 + n) * np.dot(rates.T, g * n)
    loss = n * np.dot(rates, g * (1.0 + n))
    return gain, loss


def collision_pph(state, kernel):
    """Return the phonon collision term dn_i/dt of every node.

    Particle number is conserved: sum(g_i*dn_i/dt) vanishes up to rounding.

    """
    gain, loss = pph_rates(state, kernel)
    return gain - loss


def collision_pp(state, channels):
    """Return the pair collision term dn_i/dt of every node.

    Each channel (i, j) <-> (l, m) moves weight*F particles per unit time
    from i and j into l and m, with
    F = n_i*n_j*(1+n_l)*(1+n_m) - n_l*n_m*(1+n_i)*(1+n_j).

    """
    n = state.n
    N = channels.N
    a, b, c, d = channels.i, channels.j, channels.l, channels.m
    forward = n[a] * n[b] * (1.0 + n[c]) * (1.0 + n[d])
    backward = n[c] * n[d] * (1.0 + n[a]) * (1.0 + n[b])
    flux = channels.weight * (forward - backward)
    change = (np.bincount(c, flux, N) + np.bincount(d, flux, N)
              - np.bincount(a, flux, N) - np.bincount(b, flux, N))
    return change / channels.shell_weights


def _collisions(state, kernels):
    total = np.zeros(len(state.n))
    if kernels.pairs is not None:
        total += collision_pp(state, kernels.pairs)
    if kernels.phonon is not None:
        total += collision_pph(state, kernels.phonon)
    return total


def rhs(state, kernels, pump=None, decay=True):
    """Return dn/dt: pump + pair collisions + phonon collisions - n/tau.

    Parameters
    ----------
    state : KineticState
        The state to evaluate at.
    kernels : Kernels
        The grid and collision kernels.
    pump : PumpSpec, optional
        The pump (default None, no pump).
    decay : bool, optional
        True if the radiative decay n/tau is included (default True).

    """
    total = _collisions(state, kernels)
    if pump is not None:
        total += pump_profile(pump, kernels.grid) * math.tanh(state.t / pump.t0)
    if decay:
        total -= state.n / kernels.grid.table.lifetime
    return total


def observe(state, grid, snapshot=False):
    """Return the Observables of a state, with the occupations if `snapshot`.

    """
    n0 = float(state.n[0])
    total = grid.total(state.n)
    ratio = n0 / total if total > 0 else 0.0
    return Observables(float(state.t), n0, total, ratio,
                       state.n.copy() if snapshot else None)


def _stationary_at(times, totals, condensate, end, window, eps):
    # Both relative drifts over the window ending at sample `end`
    start = int(np.searchsorted(times, times[end] - window * (1 + 1e-12), side='left'))
    if end == start or times[end] - times[0] < window * (1 - 1e-12):
        return False
    dt = np.diff(times[start:end + 1])
    for values in (totals, condensate):
        drift = np.max(np.abs(np.diff(values[start:end + 1])) / dt)
        if drift * window / max(abs(values[end]), STATIONARY_FLOOR) >= eps:
            return False
    return True


def detect_stationary(observables, window=200.0, eps=0.02):
    """Return the earliest time at which the trajectory is stationary.

    A sample at time t counts as stationary when, over the window
    [t - window, t], both max|dN_tot/dt|*window/N_tot and
    max|dn0/dt|*window/n0 stay below eps. Totals under 1e-9 are measured
    against 1e-9, so a trajectory decaying to nothing becomes stationary.

    Parameters
    ----------
    observables : sequence of Observables
        The trajectory in time order.
    window : float, optional
        The window in ps (default 200).
    eps : float, optional
        The relative tolerance (default 0.02).

    Returns
    -------
    Stationarity
        (True, t) for the earliest such t, or (False, None) if there is
        none, including when the trajectory is shorter than the window.

    """
    times = np.array([obs.t for obs in observables], dtype=float)
    totals = np.array([obs.N_tot for obs in observables], dtype=float)
    condensate = np.array([obs.n0 for obs in observables], dtype=float)
    for end in range(len(times)):
        if _stationary_at(times, totals, condensate, end, window, eps):
            return Stationarity(True, float(times[end]))
    return Stationarity(False, None)


class Trajectory(object):
    """The output of an evolution.

    Attributes
    ----------
    observables : list of Observables
        Samples at t = 0, every output interval, and the final time; the
        final sample always carries a snapshot.
    final : KineticState
        The state at the last sample.
    stationarity : Stationarity
        When the trajectory first became stationary, if it did.
    counters : dict of str to int
        Integrator audit counts: 'accepted', 'rejected', 'negative_rejected',
        'negative_clamps', and 'rhs_evaluations'.
    elapsed : float
        Wall-clock seconds spent.

    """
    def __init__(self):
        self.observables = []
        self.final = None
        self.stationarity = Stationarity(False, None)
        self.counters = {'accepted': 0, 'rejected': 0, 'negative_rejected': 0,
                         'negative_clamps': 0, 'rhs_evaluations': 0}
        self.elapsed = 0.0

    def __len__(self):
        return len(self.observables)

    @property
    def last(self):
        """The last Observables."""
        return self.observables[-1]

    @property
    def snapshots(self):
        """The Observables that carry occupations."""
        return [obs for obs in self.observables if obs.f_k is not None]


def _embedded_step(drift, t, y, h):
    # One Bogacki-Shampine step; returns the new state and the error estimate
    stages = [drift(t, y)]
    for row in range(1, len(_STAGES)):
        increment = sum(coeff * stage for coeff, stage in zip(_TABLEAU[row], stages))
        y_stage = y + h * increment
        stages.append(drift(t + _STAGES[row] * h, y_stage))
    y_new = y_stage
    error = h * sum(coeff * stage for coeff, stage in zip(_ERROR, stages))
    return y_new, error


def evolve(initial, t_end, kernels, pump=None, rtol=1e-4, atol=1e-8, h0=0.05, h_max=5.0,
           output_every=10.0, snapshot_every=0.0, decay_splitting=True, decay=True,
           window=200.0, eps=0.02, stop_when_stationary=False):
    """Integrate the occupations from `initial` to `t_end`.

    The step is adaptive, controlled by a proportional-integral rule on an
    embedded error estimate. With `decay_splitting`, the decay is applied
    exactly as exp(-h/(2*tau)) before and after each step of the other
    terms.

    Parameters
    ----------
    initial : KineticState
        The starting state.
    t_end : float
        The final time in ps.
    kernels : Kernels
        The grid and collision kernels.
    pump : PumpSpec, optional
        The pump (default None).
    rtol, atol : float, optional
        Relative (default 1e-4) and absolute (default 1e-8) tolerances.
    h0, h_max : float, optional
        The first and the largest step in ps (defaults 0.05 and 5).
    output_every : float, optional
        The sampling interval in ps (default 10).
    snapshot_every : float, optional
        The interval in ps of samples that carry occupations (default 0,
        final sample only).
    decay_splitting : bool, optional
        True to split off the decay (default True).
    decay : bool, optional
        False to switch the decay off (default True).
    window, eps : float, optional
        The stationarity criterion (defaults 200 ps and 0.02).
    stop_when_stationary : bool, optional
        True to stop at the first stationary sample (default False).

    Returns
    -------
    Trajectory

    Raises
    ------
    ValueError
        If t_end is not positive or rtol is outside (1e-10, 1e-2).
    NumericalError
        If occupations stop being finite or the step size underflows.

    """
    if not t_end > 0:
        raise ValueError('t_end must be positive, not {!r}'.format(t_end))
    if not 1e-10 < rtol < 1e-2:
        raise ValueError('rtol must lie in (1e-10, 1e-2), not {!r}'.format(rtol))
    if not output_every > 0:
        raise ValueError('output_every must be positive, not {!r}'.format(output_every))

    started = time.perf_counter()
    grid = kernels.grid
    trajectory = Trajectory()
    counters = trajectory.counters
    lifetimes = grid.table.lifetime
    profile = pump_profile(pump, grid) if pump is not None else None
    split = decay and decay_splitting

    def drift(t, y):
        counters['rhs_evaluations'] += 1
        total = _collisions(KineticState(t, y), kernels)
        if profile is not None:
            total = total + profile * math.tanh(t / pump.t0)
        if decay and not split:
            total = total - y / lifetimes
        return total

    def is_snapshot(t):
        if snapshot_every <= 0:
            return False
        ratio = t / snapshot_every
        return abs(ratio - round(ratio)) < 1e-9

    t = float(initial.t)
    y = np.array(initial.n, dtype=float)
    trajectory.observables.append(observe(KineticState(t, y), grid, is_snapshot(t)))
    times, totals, condensate = [t], [trajectory.last.N_tot], [trajectory.last.n0]

    h = min(h0, h_max)
    previous_error = 1e-4
    worst = 0
    next_output = t + output_every
    while t < t_end:
        target = min(next_output, t_end)
        step = min(h, h_max, target - t)
        if step < MIN_STEP:
            raise NumericalError('step size underflow', t=t, node=worst, state=y.copy())

        if split:
            half = np.exp(-0.5 * step / lifetimes)
            inner, error = _embedded_step(drift, t, y * half, step)
            y_new, error = inner * half, error * half
        else:
            y_new, error = _embedded_step(drift, t, y, step)

        if not np.all(np.isfinite(y_new)) or not np.all(np.isfinite(error)):
            bad = np.flatnonzero(~np.isfinite(y_new) | ~np.isfinite(error))
            raise NumericalError('occupations are no longer finite', t=t, node=int(bad[0]),
                                 state=y.copy())

        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        ratios = np.abs(error) / scale
        worst = int(np.argmax(ratios))
        norm = float(ratios[worst])

        if norm > 1.0:
            counters['rejected'] += 1
            h = step * max(MIN_FACTOR, SAFETY * norm**(-1.0 / _ORDER))
            continue
        if y_new.min() < -NEGATIVE_FLOOR:
            counters['negative_rejected'] += 1
            worst = int(np.argmin(y_new))
            h = 0.5 * step
            continue

        negative = y_new < 0
        if np.any(negative):
            counters['negative_clamps'] += int(np.count_nonzero(negative))
            y_new[negative] = 0.0

        counters['accepted'] += 1
        factor = SAFETY * max(norm, 1e-10)**(-0.7 / _ORDER) * previous_error**(0.4 / _ORDER)
        previous_error = max(norm, 1e-4)
        h = step * min(MAX_FACTOR, max(MIN_FACTOR, factor))
        t, y = t + step, y_new
        if t >= target - 1e-12 * max(1.0, abs(target)):
            t = target
            state = KineticState(t, y)
            trajectory.observables.append(observe(state, grid, is_snapshot(t)))
            times.append(t)
            totals.append(trajectory.last.N_tot)
            condensate.append(trajectory.last.n0)
            if target == next_output:
                next_output += output_every
            if not trajectory.stationarity.stationary and _stationary_at(
                    np.array(times), np.array(totals), np.array(condensate), len(times) - 1,
                    window, eps):
                trajectory.stationarity = Stationarity(True, t)
                if stop_when_stationary:
                    break

    final = trajectory.last
    if final.f_k is None:
        trajectory.observables[-1] = final._replace(f_k=y.copy())
    trajectory.final = KineticState(t, y)
    trajectory.elapsed = time.perf_counter() - started
    return trajectory


def fit_bose_einstein(energies, occupations, nodes=None):
    """Fit n = 1/(exp((E - mu)/kT) - 1) to occupations.

    The fit is linear in log(1 + 1/n) = (E - mu)/kT, which is exact for a
    Bose-Einstein distribution.

    Parameters
    ----------
    energies : array_like
        Energies in meV.
    occupations : array_like
        Positive occupations.
    nodes : array_like of int or bool, optional
        The entries to fit (default all).

    Returns
    -------
    BoseEinsteinFit

    Raises
    ------
    ValueError
        If fewer than two occupations are selected, any is not positive,
        or the fitted temperature is not positive.

    Examples
    --------
    >>> import numpy as np
    >>> from polariton import material
    >>> from polariton.kinetics import fit_bose_einstein
    >>> E = np.linspace(0.0, 2.0, 9)
    >>> n = 1 / np.expm1((E + 0.3) / (material.KB_MEV_PER_K * 4.0))
    >>> fit = fit_bose_einstein(E, n)
    >>> round(fit.temperature, 6), round(fit.mu, 6)
    (4.0, -0.3)

    """
    E = np.asarray(energies, dtype=float)
    n = np.asarray(occupations, dtype=float)
    if nodes is not None:
        E, n = E[nodes], n[nodes]
    if len(n) < 2:
        raise ValueError('a Bose-Einstein fit needs at least two occupations')
    if np.any(n <= 0):
        raise ValueError('a Bose-Einstein fit needs positive occupations')

    slope, intercept = np.polyfit(E, np.log1p(1.0 / n), 1)
    if not slope > 0:
        raise ValueError('occupations do not fall with energy; no positive temperature fits')
    kT = 1.0 / slope
    mu = -intercept * kT
    fitted = 1.0 / np.expm1((E - mu) / kT)
    residual = float(np.sqrt(np.mean((np.log(n) - np.log(fitted))**2)))
    return BoseEinsteinFit(float(kT / mat.KB_MEV_PER_K), float(mu), residual)


def bottleneck_ratio(n):
    """Return max(n_i for i > 0)/n_0, the bottleneck indicator of a distribution.

    """
    n = np.asarray(n, dtype=float)
    peak = float(n[1:].max())
    return peak / n[0] if n[0] > 0 else math.inf
