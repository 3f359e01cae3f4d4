# Copyright: (C) 2026 The polariton developers
# License: GNU GPL version 3

"""Batch protocols: pump thresholds, S-curves, and sweeps over field and pump.

Every protocol reads its settings from a RunConfig. Grids and kernels are
built once per field value and process, and reused by every run at that
field.

"""
import math
import time
from collections import namedtuple
from concurrent.futures import ProcessPoolExecutor

from polariton import grid as grd
from polariton import kinetics
from polariton import material as mat
from polariton.config import TRAJECTORY_PRESETS
from polariton.error import NumericalError


THRESHOLD_BAND = (0.9, 1.1)
BRACKET_FACTOR = 10.0
FIG2_MULTIPLIERS = (0.5, 1.0, 2.4)

STATUS_OK = 'ok'
STATUS_NOT_CONVERGED = 'not-converged'
STATUS_NOT_BRACKETED = 'not-bracketed'
STATUS_NUMERICAL_FAILURE = 'numerical-failure'


ThresholdStep = namedtuple('ThresholdStep', ['p0', 'n0', 'stationary', 'stationary_time'])

ThresholdResult = namedtuple('ThresholdResult', ['p_th', 'converged', 'history', 'max_n0',
                                                 'bracketed'])
ThresholdResult.__doc__ = """The outcome of a threshold search.

Fields: p_th (1/ps, or None if no pump in range reaches n0 = 1), converged
(True if the stationary n0 at p_th lies in the 0.9 to 1.1 band), history
(the ThresholdStep of every run in order), max_n0 (the largest n0 seen),
and bracketed (True if n0 = 1 was bracketed).

"""

ScurvePoint = namedtuple('ScurvePoint', ['multiplier', 'p0', 'n0', 'N_tot', 'converged'])

SweepRecord = namedtuple('SweepRecord', ['B', 'k_p', 'multiplier', 'p0', 'p_th_ref', 'n0',
                                         'N_tot', 'ratio', 'stationary_time', 'converged',
                                         'status', 'message', 'elapsed', 'kernel_keys',
                                         'counters', 'observables'])
SweepRecord.__doc__ = """The outcome of one sweep point.

Points that did not converge carry their last observables; points that
failed carry NaN observables and a message. `observables` holds the
trajectory only when the plan asks for it.

"""

FieldThreshold = namedtuple('FieldThreshold', ['k_p', 'B_th'])

Fig2Result = namedtuple('Fig2Result', ['threshold', 'runs', 'scurve'])


class SweepPlan(namedtuple('SweepPlan', ['config', 'B_values', 'k_p_values', 'multipliers',
                                         'rereference', 'reference_k_p', 'keep_trajectories'])):
    """The points of a sweep over field, pump wavenumber, and pump strength.

    Parameters
    ----------
    config : RunConfig
        The base configuration of every run.
    B_values : tuple of float
        Fields in T.
    k_p_values : tuple of float
        Pump wavenumbers in 1/nm.
    multipliers : tuple of float
        Pump strengths in units of the reference threshold.
    rereference : bool, optional
        True to reference each field to its own threshold, False to use
        the zero-field threshold (default False).
    reference_k_p : float, optional
        The pump wavenumber of the reference threshold (default None, the
        point's own).
    keep_trajectories : bool, optional
        True to keep each point's trajectory (default False).

    Raises
    ------
    ValueError
        If an axis is empty.
    FieldDomainError
        If a field lies outside the mass-law domain.

    """
    __slots__ = ()

    def __new__(cls, config, B_values, k_p_values, multipliers, rereference=False,
                reference_k_p=None, keep_trajectories=False):
        self = super(SweepPlan, cls).__new__(cls, config, tuple(B_values), tuple(k_p_values),
                                             tuple(multipliers), rereference, reference_k_p,
                                             keep_trajectories)
        if not (self.B_values and self.k_p_values and self.multipliers):
            raise ValueError('every sweep axis needs at least one value')
        material = config.material
        for B in self.B_values:
            mat.check_field(B, material)
        return self

    def points(self):
        """Return the (B, k_p, multiplier) of every point in sorted order."""
        return [(B, k_p, m) for B in sorted(set(self.B_values))
                for k_p in sorted(set(self.k_p_values)) for m in sorted(set(self.multipliers))]

    def reference(self, B, k_p):
        """Return the (B, k_p) whose threshold a point is referenced to."""
        return (B if self.rereference else 0.0,
                k_p if self.reference_k_p is None else self.reference_k_p)


class SweepResult(object):
    """The records of a sweep, keyed by (B, k_p, multiplier).

    Parameters
    ----------
    records : iterable of SweepRecord
        The records, in any order.
    thresholds : dict of (float, float) to ThresholdResult, optional
        The reference thresholds by (B, k_p) (default None).

    """
    def __init__(self, records, thresholds=None):
        self.by_key = {(rec.B, rec.k_p, rec.multiplier): rec for rec in records}
        self.thresholds = dict(thresholds or {})

    def __len__(self):
        return len(self.by_key)

    def __iter__(self):
        return iter(self.records)

    def __getitem__(self, key):
        return self.by_key[key]

    @property
    def records(self):
        """The records sorted by (B, k_p, multiplier)."""
        return [self.by_key[key] for key in sorted(self.by_key)]

    def failures(self):
        """Return the records whose status is not 'ok'."""
        return [rec for rec in self.records if rec.status != STATUS_OK]


_KERNEL_MEMO = {}


def _kernel_signature(config, B):
    keys = ('grid.N', 'grid.k_max', 'grid.spacing', 'scattering.angular_nodes',
            'scattering.curvature_floor', 'scattering.pp', 'scattering.pph')
    return (float(B), config.material) + tuple(config[key] for key in keys)


def grid_for(config, B):
    """Return the configured KGrid at field B (without kernels)."""
    material = config.material
    return grd.build_grid(material, mat.field_state(material, B), N=config['grid.N'],
                          k_max=config['grid.k_max'], spacing=config['grid.spacing'])


def kernels_for(config, B):
    """Return the Kernels of the configured grid at field B, memoized per process.

    """
    signature = _kernel_signature(config, B)
    try:
        return _KERNEL_MEMO[signature]
    except KeyError:
        pass
    grid = grid_for(config, B)
    kernels = kinetics.build_kernels(grid, grid.material, grid.field, pp=config['scattering.pp'],
                                     pph=config['scattering.pph'],
                                     angular_nodes=config['scattering.angular_nodes'],
                                     curvature_floor=config['scattering.curvature_floor'],
                                     cache_dir=config['scattering.cache_dir'] or None)
    _KERNEL_MEMO[signature] = kernels
    return kernels


def kernel_keys(kernels):
    """Return the content hashes of the collision kernels (None where disabled)."""
    return (kernels.phonon.key if kernels.phonon is not None else None,
            kernels.pairs.key if kernels.pairs is not None else None)


def kernel_report(kernels):
    """Return the grid hash, kernel hashes, and kernel clamp counts as a dict."""
    phonon_key, pairs_key = kernel_keys(kernels)
    return {'grid': kernels.grid.content_hash(), 'phonon': phonon_key, 'pairs': pairs_key,
            'clamps': dict(kernels.pairs.clamps) if kernels.pairs is not None else {}}


def run_counters(trajectory, kernels):
    """Return the integrator counters of a run merged with its kernel clamp counts."""
    counters = dict(trajectory.counters)
    if kernels.pairs is not None:
        counters.update(('clamped_' + name, count) for name, count in kernels.pairs.clamps.items())
    return counters


def simulate(config, B=None, k_p=None, p0=None, t_end=None, stop=None):
    """Evolve from the empty state under the configured pump and return the Trajectory.

    Parameters
    ----------
    config : RunConfig
        The configuration.
    B, k_p, p0 : float, optional
        Field, pump wavenumber, and pump strength overriding the
        configured ones (default None each).
    t_end : float, optional
        The final time overriding 'integrator.t_end' (default None).
    stop : bool, optional
        Whether to stop once stationary, overriding 'stationary.stop'
        (default None).

    """
    B = config['field.B'] if B is None else B
    kernels = kernels_for(config, B)
    options = config.evolve_options(t_end=t_end)
    end = options.pop('t_end')
    stop = config['stationary.stop'] if stop is None else stop
    return kinetics.evolve(kinetics.initial_state(kernels.grid), end, kernels,
                           pump=config.pump(p0=p0, k_p=k_p), stop_when_stationary=stop,
                           **options)


def find_threshold(config, B, k_p, progress=None):
    """Return the ThresholdResult of the pump strength at which stationary n0 = 1.

    Starting at 'threshold.guess', the pump is scaled by 10 until n0 = 1
    is bracketed inside ['threshold.p_min', 'threshold.p_max'], and the
    bracket is then bisected geometrically until the stationary n0 lies in
    [0.9, 1.1]. At most 'threshold.max_iter' runs are made, each lasting
    up to 'threshold.t_end'.

    Parameters
    ----------
    config : RunConfig
        The configuration.
    B : float
        The field in T.
    k_p : float
        The pump wavenumber in 1/nm.
    progress : callable, optional
        Called with each ThresholdStep (default None).

    Raises
    ------
    NumericalError
        If a run fails.

    """
    p_min, p_max = config['threshold.p_min'], config['threshold.p_max']
    max_iter = config['threshold.max_iter']
    low_band, high_band = THRESHOLD_BAND
    history = []

    def trial(p0):
        trajectory = simulate(config, B=B, k_p=k_p, p0=p0, t_end=config['threshold.t_end'])
        step = ThresholdStep(p0, trajectory.last.n0, trajectory.stationarity.stationary,
                             trajectory.stationarity.time)
        history.append(step)
        if progress is not None:
            progress(step)
        return step.n0

    def result(p_th, converged, bracketed):
        max_n0 = max(step.n0 for step in history) if history else 0.0
        return ThresholdResult(p_th, converged, history, max_n0, bracketed)

    def in_band(n0):
        return low_band <= n0 <= high_band

    p0 = min(max(config['threshold.guess'], p_min), p_max)
    n0 = trial(p0)
    if in_band(n0):
        return result(p0, True, True)

    # Expand geometrically until n0 = 1 lies between `low` and `high`
    low = high = None
    if n0 < low_band:
        low = p0
    else:
        high = p0
    while low is None or high is None:
        if len(history) >= max_iter:
            return result(None, False, False)
        if high is None:
            if low >= p_max:
                return result(None, False, False)
            p0 = min(low * BRACKET_FACTOR, p_max)
        else:
            if high <= p_min:
                return result(None, False, False)
            p0 = max(high / BRACKET_FACTOR, p_min)
        n0 = trial(p0)
        if in_band(n0):
            return result(p0, True, True)
        if n0 < low_band:
            low = p0
        else:
            high = p0

    while len(history) < max_iter:
        p0 = math.sqrt(low * high)
        n0 = trial(p0)
        if in_band(n0):
            return result(p0, True, True)
        if n0 < low_band:
            low = p0
        else:
            high = p0

    # Out of runs: report the run closest to n0 = 1 in log scale
    inside = [step for step in history if low <= step.p0 <= high and step.n0 > 0]
    best = min(inside or history, key=lambda step: abs(math.log(max(step.n0, 1e-300))))
    return result(best.p0, False, True)


def _stationary_values(trajectory):
    last = trajectory.last
    return last.n0, last.N_tot, trajectory.stationarity.stationary


def _scurve_job(args):
    config, B, k_p, multiplier, p_th = args
    trajectory = simulate(config, B=B, k_p=k_p, p0=multiplier * p_th)
    n0, total, converged = _stationary_values(trajectory)
    return ScurvePoint(multiplier, multiplier * p_th, n0, total, converged)


def _map(function, jobs, workers):
    # Results in job order; a process pool when more than one worker
    if workers <= 1 or len(jobs) <= 1:
        return [function(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(function, jobs))


def run_scurve(config, p_th, multipliers=None, B=None, k_p=None):
    """Return the ScurvePoint of every pump multiplier of p_th.

    Points whose run did not become stationary are flagged with
    converged = False.

    """
    B = config['field.B'] if B is None else B
    k_p = config['pump.k_p'] if k_p is None else k_p
    multipliers = config['experiment.multipliers'] if multipliers is None else multipliers
    jobs = [(config, B, k_p, m, p_th) for m in sorted(multipliers)]
    return _map(_scurve_job, jobs, config['experiment.workers'])


def _threshold_job(args):
    config, B, k_p = args
    try:
        return find_threshold(config, B, k_p), None
    except NumericalError as err:
        return None, str(err)


def _failed_record(B, k_p, multiplier, p_th, status, message, elapsed=0.0):
    nan = float('nan')
    p0 = multiplier * p_th if p_th is not None else nan
    return SweepRecord(B, k_p, multiplier, p0, p_th if p_th is not None else nan, nan, nan,
                       nan, None, False, status, message, elapsed, (None, None), {}, None)


def _point_job(args):
    config, B, k_p, multiplier, p_th, keep = args
    started = time.perf_counter()
    try:
        kernels = kernels_for(config, B)
        trajectory = simulate(config, B=B, k_p=k_p, p0=multiplier * p_th)
    except NumericalError as err:
        return _failed_record(B, k_p, multiplier, p_th, STATUS_NUMERICAL_FAILURE, str(err),
                              time.perf_counter() - started)
    last = trajectory.last
    stationarity = trajectory.stationarity
    status = STATUS_OK if stationarity.stationary else STATUS_NOT_CONVERGED
    return SweepRecord(B, k_p, multiplier, multiplier * p_th, p_th, last.n0, last.N_tot,
                       last.ratio, stationarity.time, stationarity.stationary, status, '',
                       time.perf_counter() - started, kernel_keys(kernels),
                       run_counters(trajectory, kernels),
                       trajectory.observables if keep else None)


def plan_from_config(config):
    """Return the SweepPlan of the `sweep.*` keys of a configuration."""
    return SweepPlan(config, config['sweep.B'], config['sweep.k_p'], config['sweep.multipliers'],
                     rereference=config['sweep.rereference'],
                     reference_k_p=config['sweep.reference_k_p'],
                     keep_trajectories=config['experiment.preset'] in TRAJECTORY_PRESETS)


def run_field_sweep(plan, progress=None):
    """Run every point of a SweepPlan and return the SweepResult.

    Each point evolves at p0 = multiplier * p_th, p_th being the threshold
    of its reference (B, k_p), to stationarity. Thresholds are found
    first; a point whose reference has no threshold, or whose run fails,
    is recorded with its status instead of stopping the sweep.

    Parameters
    ----------
    plan : SweepPlan
        The points to run.
    progress : callable, optional
        Called with each SweepRecord in point order (default None).

    """
    config = plan.config
    workers = config['experiment.workers']
    points = plan.points()

    references = sorted({plan.reference(B, k_p) for B, k_p, _ in points})
    outcomes = _map(_threshold_job, [(config, B, k_p) for B, k_p in references], workers)
    thresholds, problems = {}, {}
    for reference, (threshold, message) in zip(references, outcomes):
        if threshold is None:
            problems[reference] = (STATUS_NUMERICAL_FAILURE, message)
        elif threshold.p_th is None:
            problems[reference] = (STATUS_NOT_BRACKETED,
                                   'no pump in range reaches n0 = 1 (max n0 = {!r})'.format(
                                       threshold.max_n0))
            thresholds[reference] = threshold
        else:
            thresholds[reference] = threshold

    jobs, records = [], []
    for B, k_p, multiplier in points:
        reference = plan.reference(B, k_p)
        if reference in problems:
            status, message = problems[reference]
            records.append(_failed_record(B, k_p, multiplier, None, status, message))
        else:
            jobs.append((config, B, k_p, multiplier, thresholds[reference].p_th,
                         plan.keep_trajectories))
    records.extend(_map(_point_job, jobs, workers))

    result = SweepResult(records, thresholds)
    if progress is not None:
        for record in result.records:
            progress(record)
    return result


def field_threshold(records, k_p):
    """Return the field in T at which stationary n0 first falls below 1.

    The records at pump wavenumber `k_p` are taken in order of B, and B_th
    is interpolated linearly between the last record with n0 >= 1 and the
    first with n0 < 1. Records without a finite n0 are skipped.

    Returns
    -------
    FieldThreshold
        With B_th None if n0 never falls below 1.

    Examples
    --------
    >>> from collections import namedtuple
    >>> from polariton.experiments import field_threshold
    >>> Point = namedtuple('Point', ['B', 'k_p', 'n0'])
    >>> points = [Point(0.0, 0.02, 8.0), Point(2.0, 0.02, 3.0), Point(4.0, 0.02, 0.5)]
    >>> field_threshold(points, 0.02)
    FieldThreshold(k_p=0.02, B_th=3.6)

    """
    chosen = sorted((rec for rec in records if rec.k_p == k_p and math.isfinite(rec.n0)),
                    key=lambda rec: rec.B)
    previous = None
    for rec in chosen:
        if rec.n0 < 1.0:
            if previous is None:
                return FieldThreshold(k_p, rec.B)
            fraction = (previous.n0 - 1.0) / (previous.n0 - rec.n0)
            return FieldThreshold(k_p, previous.B + fraction * (rec.B - previous.B))
        previous = rec
    return FieldThreshold(k_p, None)


def field_thresholds(result):
    """Return the FieldThreshold of every pump wavenumber of a SweepResult.

    Only records at the smallest multiplier of the sweep are used.

    """
    records = result.records
    if not records:
        return []
    lowest = min(rec.multiplier for rec in records)
    chosen = [rec for rec in records if rec.multiplier == lowest]
    return [field_threshold(chosen, k_p) for k_p in sorted({rec.k_p for rec in chosen})]


def run_fig2(config, progress=None):
    """Return the Fig2Result of the threshold protocol at the configured B and k_p.

    The threshold is found first; then runs at 0.5, 1, and 2.4 times it
    evolve for 'integrator.t_end' without stopping, and the S-curve over
    'experiment.multipliers' follows. Without a threshold, `runs` and
    `scurve` are empty.

    """
    B, k_p = config['field.B'], config['pump.k_p']
    threshold = find_threshold(config, B, k_p, progress=progress)
    if threshold.p_th is None:
        return Fig2Result(threshold, [], [])
    runs = [(m, simulate(config, B=B, k_p=k_p, p0=m * threshold.p_th, stop=False))
            for m in FIG2_MULTIPLIERS]
    scurve = run_scurve(config, threshold.p_th, B=B, k_p=k_p)
    return Fig2Result(threshold, runs, scurve)
