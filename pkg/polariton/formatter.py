# Copyright: (C) 2026 The polariton developers
# License: GNU GPL version 3

"""Functions for formatting results as CSV and JSON text and writing them out.

Every float is written as its `repr`, which does not depend on the locale
and reads back to the same double. CSV rows end in '\\n' and carry no
timestamps, so identical runs give identical files; timestamps appear
only in the manifest.

Examples
--------
>>> from polariton.formatter import format_cell, csv_text
>>> format_cell(0.1), format_cell(True), format_cell(None), format_cell(float('nan'))
('0.1', 'true', '', 'nan')
>>> print(csv_text(['B_T', 'n0'], [[0.0, 12.5], [2.0, 1e-06]]), end='')
B_T,n0
0.0,12.5
2.0,1e-06

"""
import hashlib
import json
import math
import os
import platform
import tempfile
from collections import namedtuple, OrderedDict

import numpy as np
import scipy

import polariton
from polariton import dispersion
from polariton import grid as grd


MANIFEST_NAME = 'manifest.json'
MANIFEST_SCHEMA = 1
CSV_SCHEMA = 1

# In the field order of DispersionPoint
DISPERSION_HEADER = ['k_nm_inv', 'E_x_eV', 'E_c_eV', 'E_lp_eV', 'x2', 'c2', 'dE_dk_eV_nm',
                     'd2E_dk2_eV_nm2', 'tau_ps']
TRAJECTORY_HEADER = ['t_ps', 'n0', 'N_tot', 'n0_ratio']
DISTRIBUTION_HEADER = ['k_nm_inv', 'E_lp_meV', 'f_k']
THRESHOLD_HEADER = ['p0', 'n0', 'stationary', 'stationary_time_ps']
SCURVE_HEADER = ['multiplier', 'p0', 'n0', 'N_tot', 'converged']
SWEEP_HEADER = ['B_T', 'k_p_nm_inv', 'multiplier', 'p0', 'p_th_ref', 'n0', 'N_tot', 'n0_ratio',
                'stationary_time_ps', 'converged', 'status']
FIELD_THRESHOLD_HEADER = ['k_p_nm_inv', 'B_th_T']


Table = namedtuple('Table', ['header', 'rows'])


def format_cell(value):
    """Return the CSV text of a value.

    Floats are written with `repr`, booleans as 'true'/'false', None as an
    empty cell, and anything else with `str`.

    """
    if value is None:
        return ''
    if isinstance(value, (bool, np.bool_)):
        return 'true' if value else 'false'
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def csv_text(header, rows):
    """Return the text of a CSV table with a header row and '\\n' line endings.

    """
    lines = [','.join(header)]
    for row in rows:
        lines.append(','.join(format_cell(value) for value in row))
    return '\n'.join(lines) + '\n'


def number_label(value):
    """Return the text a number takes in file names.

    >>> from polariton.formatter import number_label
    >>> number_label(2.0), number_label(2.5)
    ('2', '2.5')

    """
    value = float(value)
    return str(int(value)) if value.is_integer() else repr(value)


def dispersion_table(field, points=401, k_max=0.5):
    """Return the Table of the dispersion at `points` wavenumbers up to k_max.

    Energies are in eV, as in the DispersionPoint.

    """
    k_values = grd.node_wavenumbers(points, k_max)
    rows = [list(dispersion.dispersion_point(k, field)) for k in k_values]
    return Table(DISPERSION_HEADER, rows)


def trajectory_table(trajectory, nodes=None):
    """Return the Table of a Trajectory.

    Rows that are snapshots carry the occupation of every node after the
    fixed columns; other rows leave those cells empty.

    Parameters
    ----------
    trajectory : Trajectory
        The trajectory to tabulate.
    nodes : int, optional
        The number of nodes (default the length of the last snapshot).

    """
    if nodes is None:
        snapshots = trajectory.snapshots
        nodes = len(snapshots[-1].f_k) if snapshots else 0
    header = TRAJECTORY_HEADER + ['n_{}'.format(i) for i in range(nodes)]
    rows = []
    for obs in trajectory.observables:
        row = [obs.t, obs.n0, obs.N_tot, obs.ratio]
        if obs.f_k is not None:
            row.extend(obs.f_k)
        else:
            row.extend([None] * nodes)
        rows.append(row)
    return Table(header, rows)


def distribution_table(grid, occupations):
    """Return the Table of the distribution f_k = n_k*S (S in square micrometers).

    """
    area_um2 = grid.material.qw_area
    rows = [[k, E, n * area_um2]
            for k, E, n in zip(grid.k_values, grid.energies, occupations)]
    return Table(DISTRIBUTION_HEADER, rows)


def threshold_table(result):
    """Return the Table of the runs of a ThresholdResult in the order they were made.

    """
    return Table(THRESHOLD_HEADER, [list(step) for step in result.history])


def scurve_table(points):
    """Return the Table of a list of ScurvePoint."""
    return Table(SCURVE_HEADER, [list(point) for point in points])


def sweep_table(result):
    """Return the Table of a SweepResult, one row per point sorted by (B, k_p, multiplier).

    """
    rows = [[rec.B, rec.k_p, rec.multiplier, rec.p0, rec.p_th_ref, rec.n0, rec.N_tot,
             rec.ratio, rec.stationary_time, rec.converged, rec.status]
            for rec in result.records]
    return Table(SWEEP_HEADER, rows)


def field_threshold_table(thresholds):
    """Return the Table of a list of FieldThreshold."""
    return Table(FIELD_THRESHOLD_HEADER, [[th.k_p, th.B_th] for th in thresholds])


def _json_ready(value):
    # JSON has no NaN or infinities; numpy scalars and arrays become plain values
    if isinstance(value, dict):
        return OrderedDict((str(key), _json_ready(item)) for key, item in value.items())
    if isinstance(value, (list, tuple)):
        return [_json_ready(item) for item in value]
    if isinstance(value, np.ndarray):
        return [_json_ready(item) for item in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def manifest_text(manifest):
    """Return the JSON text of a manifest with sorted keys.

    >>> from polariton.formatter import manifest_text
    >>> print(manifest_text({'n0': float('nan'), 'command': 'run'}), end='')
    {
      "command": "run",
      "n0": null
    }

    """
    return json.dumps(_json_ready(manifest), indent=2, sort_keys=True, allow_nan=False) + '\n'


def versions():
    """Return the versions of the package, numpy, scipy, and Python."""
    return {'polariton': polariton.__version__, 'numpy': np.__version__,
            'scipy': scipy.__version__, 'python': platform.python_version()}


def write_atomic(path, text):
    """Write text to a file through a temporary file and an atomic rename.

    Returns
    -------
    str
        The sha256 hex digest of the bytes written.

    Raises
    ------
    OSError
        If the directory cannot be written; the target is left untouched.

    """
    data = text.encode('utf-8')
    directory = os.path.dirname(os.path.abspath(path))
    handle, temp_path = tempfile.mkstemp(prefix='.tmp-', dir=directory)
    try:
        with os.fdopen(handle, 'wb') as temp:
            temp.write(data)
        # mkstemp creates files readable by the owner only
        os.chmod(temp_path, 0o644)
        os.replace(temp_path, path)
    except BaseException:
        if os.path.exists(temp_path):
            os.remove(temp_path)
        raise
    return hashlib.sha256(data).hexdigest()


def write_outputs(tables, out_dir):
    """Write CSV tables into a directory and return their sha256 digests.

    Parameters
    ----------
    tables : dict of str to Table
        File names mapped to their tables.
    out_dir : str
        The directory, created if needed.

    Returns
    -------
    OrderedDict of str to str
        The file names, sorted, mapped to the sha256 of their contents.

    Raises
    ------
    OSError
        If a file cannot be written; the message names the path.

    """
    os.makedirs(out_dir, exist_ok=True)
    digests = OrderedDict()
    for name in sorted(tables):
        table = tables[name]
        path = os.path.join(out_dir, name)
        try:
            digests[name] = write_atomic(path, csv_text(table.header, table.rows))
        except OSError as err:
            raise OSError(err.errno, 'cannot write {}: {}'.format(path, err.strerror))
    return digests


def write_manifest(manifest, out_dir):
    """Write `manifest.json` into a directory and return its path.

    """
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, MANIFEST_NAME)
    try:
        write_atomic(path, manifest_text(manifest))
    except OSError as err:
        raise OSError(err.errno, 'cannot write {}: {}'.format(path, err.strerror))
    return path
