# Copyright: (C) 2026 The polariton developers
# License: GNU GPL version 3

"""The module containing the RunConfig class and its text format.

A configuration file holds one `section.key = value` per line. Text after
a '#' is a comment, lists are comma-separated, and booleans are written
'true' or 'false'. Every key has a default, so an empty file is a complete
configuration. Naming an `experiment.preset` fills in the values of that
preset for every key the text does not set itself.

Examples
--------
>>> from polariton.config import parse_text
>>> config = parse_text('field.B = 2.0  # tesla', overrides=['grid.N = 60'])
>>> config['field.B'], config['grid.N'], config['pump.k_p']
(2.0, 60, 0.02)
>>> parse_text('field.B = 7.0', source='run.cfg')
Traceback (most recent call last):
    ...
polariton.error.ConfigError: run.cfg:1: B = 7.0 T is at or beyond the exciton mass pole at 6.348 T

"""
import math
from collections import OrderedDict

from polariton import grid as grd
from polariton import material as mat
from polariton.error import ConfigError, FieldDomainError
from polariton.kinetics import PumpSpec


# Values each preset fills in; keys set explicitly keep their own values
PRESETS = OrderedDict([
    ('fig1', {'dispersion.B_values': (0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0)}),
    ('fig2', {'field.B': 0.0, 'pump.k_p': 0.02}),
    ('fig3', {'sweep.B': (0.0, 2.0, 4.0), 'sweep.k_p': (0.02, 0.1, 0.2),
              'sweep.multipliers': (2.4,), 'sweep.reference_k_p': None}),
    ('fig4', {'sweep.B': (0.0, 1.0, 2.0, 3.0, 4.0, 5.0),
              'sweep.k_p': tuple(round(0.02 * i, 2) for i in range(1, 16)),
              'sweep.multipliers': (2.4,), 'sweep.reference_k_p': 0.02}),
    ('fig5', {'sweep.B': (0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0),
              'sweep.k_p': (0.02, 0.06, 0.1, 0.2, 0.3), 'sweep.multipliers': (2.4,),
              'sweep.reference_k_p': None}),
])
PRESET_NAMES = ('custom',) + tuple(PRESETS)
# Presets whose sweep records keep their full trajectories
TRAJECTORY_PRESETS = ('fig3',)

# Configuration names of the MaterialSet fields
MATERIAL_KEYS = OrderedDict([
    ('m_e', 'electron_mass'),
    ('m_h', 'hole_mass'),
    ('eps_b', 'dielectric_const'),
    ('L_z', 'qw_thickness'),
    ('S', 'qw_area'),
    ('rho', 'mass_density'),
    ('u_s', 'sound_velocity'),
    ('d_e', 'deformation_potential_e'),
    ('d_h', 'deformation_potential_h'),
    ('a0', 'bohr_radius'),
    ('E0', 'binding_energy'),
    ('hbar_omega_t', 'exciton_line'),
    ('hbar_omega_0', 'photon_floor'),
    ('Omega_X', 'rabi_splitting'),
    ('tau_c', 'photon_lifetime'),
    ('tau_x', 'exciton_lifetime'),
    ('T', 'temperature'),
    ('D2', 'shift_coeff'),
    ('D_M', 'mass_coeff'),
    ('binding_law', 'binding_law'),
])

# Keys whose values are fields in tesla checked against the mass-law pole
FIELD_KEYS = ('field.B', 'sweep.B', 'dispersion.B_values')
# Material keys that move the pole
POLE_KEYS = ('material.m_e', 'material.m_h', 'material.D_M')

SCURVE_MULTIPLIERS = (0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 2.4, 3.0, 5.0, 10.0, 20.0, 50.0, 100.0)


def _positive(value):
    return None if value > 0 else 'must be positive'


def _nonnegative(value):
    return None if value >= 0 else 'must not be negative'


def _at_least(bound):
    def check(value):
        return None if value >= bound else 'must be at least {}'.format(bound)
    return check


def _each(check):
    def check_all(values):
        if not values:
            return 'must list at least one value'
        for value in values:
            problem = check(value)
            if problem:
                return '{} ({!r})'.format(problem, value)
        return None
    return check_all


def _choice(names):
    def check(value):
        return None if value in names else 'must be one of {}'.format(', '.join(names))
    return check


def _rtol(value):
    return None if 1e-10 < value < 1e-2 else 'must lie strictly between 1e-10 and 1e-2'


def _nonempty(value):
    return None if value else 'must not be empty'


def _material_check(field):
    def check(value):
        try:
            mat.MaterialSet(**{field: value})
        except ValueError as err:
            return str(err).split(field, 1)[-1].strip() or 'is out of range'
        return None
    return check


def _material_defaults():
    entries = []
    for key, field in MATERIAL_KEYS.items():
        default = getattr(mat.DEFAULT_MATERIAL, field)
        kind = 'str' if field == 'binding_law' else 'float'
        entries.append(('material.' + key, default, kind, _material_check(field)))
    return entries


# (key, default, kind, check); check returns None or a problem description
_DEFAULTS = _material_defaults() + [
    ('field.B', 0.0, 'float', _nonnegative),
    ('grid.N', 150, 'int', _at_least(grd.MIN_NODES)),
    ('grid.k_max', 0.5, 'float', _positive),
    ('grid.spacing', 'uniform-k', 'str', _choice(grd.SPACINGS)),
    ('scattering.angular_nodes', 32, 'int', _at_least(2)),
    ('scattering.curvature_floor', 1e-6, 'float', _positive),
    ('scattering.pp', True, 'bool', None),
    ('scattering.pph', True, 'bool', None),
    ('scattering.cache_dir', '', 'str', None),
    ('pump.p0', 1e-3, 'float', _nonnegative),
    ('pump.k_p', 0.02, 'float', _nonnegative),
    ('pump.Gamma', 0.5, 'float', _positive),
    ('pump.t0', 50.0, 'float', _positive),
    ('integrator.t_end', 1000.0, 'float', _positive),
    ('integrator.rtol', 1e-4, 'float', _rtol),
    ('integrator.atol', 1e-8, 'float', _positive),
    ('integrator.h0', 0.05, 'float', _positive),
    ('integrator.h_max', 5.0, 'float', _positive),
    ('integrator.output_every', 10.0, 'float', _positive),
    ('integrator.snapshot_every', 0.0, 'float', _nonnegative),
    ('integrator.decay_splitting', True, 'bool', None),
    ('stationary.window', 200.0, 'float', _positive),
    ('stationary.eps', 0.02, 'float', _positive),
    ('stationary.stop', True, 'bool', None),
    ('threshold.p_min', 1e-6, 'float', _positive),
    ('threshold.p_max', 1e2, 'float', _positive),
    ('threshold.max_iter', 40, 'int', _at_least(1)),
    ('threshold.guess', 1e-3, 'float', _positive),
    ('threshold.t_end', 2000.0, 'float', _positive),
    ('experiment.preset', 'custom', 'str', _choice(PRESET_NAMES)),
    ('experiment.multipliers', SCURVE_MULTIPLIERS, 'floats', _each(_positive)),
    ('experiment.workers', 1, 'int', _at_least(1)),
    ('sweep.B', (0.0, 2.0, 4.0), 'floats', _each(_nonnegative)),
    ('sweep.k_p', (0.02,), 'floats', _each(_nonnegative)),
    ('sweep.multipliers', (2.4,), 'floats', _each(_positive)),
    ('sweep.rereference', False, 'bool', None),
    ('sweep.reference_k_p', None, 'optional-float', _nonnegative),
    ('dispersion.B_values', (0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0), 'floats',
     _each(_nonnegative)),
    ('dispersion.points', 401, 'int', _at_least(2)),
    ('dispersion.k_max', 0.5, 'float', _positive),
    ('output.dir', 'out', 'str', _nonempty),
]

DEFAULTS = OrderedDict((key, default) for key, default, _, _ in _DEFAULTS)
_KINDS = {key: kind for key, _, kind, _ in _DEFAULTS}
_CHECKS = {key: check for key, _, _, check in _DEFAULTS}


def _parse_value(key, text):
    # Convert the text of a value to the kind of `key`; raises ValueError
    kind = _KINDS[key]
    text = text.strip()
    if kind == 'float':
        return float(text)
    if kind == 'int':
        return int(text)
    if kind == 'bool':
        lowered = text.lower()
        if lowered not in ('true', 'false'):
            raise ValueError("expected 'true' or 'false', not {!r}".format(text))
        return lowered == 'true'
    if kind == 'floats':
        return tuple(float(item) for item in text.split(',') if item.strip())
    if kind == 'optional-float':
        return float(text) if text else None
    return text


def format_value(value):
    """Return the configuration text of a value.

    Floats are written with repr so they read back bit for bit.

    """
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if value is None:
        return ''
    if isinstance(value, tuple):
        return ', '.join(repr(item) for item in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


class RunConfig(object):
    """A fully resolved run configuration.

    Parameters
    ----------
    values : mapping of str to object, optional
        Values overriding the defaults (default None); they are assumed
        valid, use `parse_text`, `parse_config`, or `replace` to validate.
    origins : mapping of str to (str, int), optional
        The source name and line number each value came from (default
        None).

    Attributes
    ----------
    values : OrderedDict of str to object
        Every key with its value, in the canonical order.
    origins : dict of str to (str, int)
        Where each non-default value was set.

    """
    def __init__(self, values=None, origins=None):
        self.values = OrderedDict(DEFAULTS)
        if values:
            unknown = [key for key in values if key not in DEFAULTS]
            if unknown:
                raise ConfigError('unknown key {!r}'.format(unknown[0]))
            self.values.update(values)
        self.origins = dict(origins or {})

    def __getitem__(self, key):
        return self.values[key]

    def __contains__(self, key):
        return key in self.values

    def __iter__(self):
        return iter(self.values)

    def __eq__(self, other):
        return isinstance(other, RunConfig) and self.values == other.values

    def __ne__(self, other):
        return not self == other

    def __hash__(self):
        return hash(self.serialize())

    def __repr__(self):
        changed = ['{}={!r}'.format(key, value) for key, value in self.values.items()
                   if value != DEFAULTS[key]]
        return 'RunConfig({})'.format(', '.join(changed))


    @property
    def material(self):
        """The MaterialSet of the `material.*` keys."""
        return mat.MaterialSet(**{field: self.values['material.' + key]
                                  for key, field in MATERIAL_KEYS.items()})

    def pump(self, p0=None, k_p=None):
        """Return the PumpSpec of the `pump.*` keys, optionally overriding p0 and k_p.

        """
        return PumpSpec(p0=self.values['pump.p0'] if p0 is None else p0,
                        k_p=self.values['pump.k_p'] if k_p is None else k_p,
                        Gamma=self.values['pump.Gamma'], t0=self.values['pump.t0'])

    def evolve_options(self, t_end=None):
        """Return the keyword arguments of `kinetics.evolve` for this configuration.

        """
        return {'rtol': self.values['integrator.rtol'],
                'atol': self.values['integrator.atol'],
                'h0': self.values['integrator.h0'],
                'h_max': self.values['integrator.h_max'],
                'output_every': self.values['integrator.output_every'],
                'snapshot_every': self.values['integrator.snapshot_every'],
                'decay_splitting': self.values['integrator.decay_splitting'],
                'window': self.values['stationary.window'],
                'eps': self.values['stationary.eps'],
                't_end': self.values['integrator.t_end'] if t_end is None else t_end}

    def replace(self, **values):
        """Return a validated copy with some values replaced.

        Keys are given with '__' in place of '.', so
        `config.replace(field__B=2.0)` sets 'field.B'. Values go through
        the same checks as parsed text. Replacing 'experiment.preset' also
        sets the values of the new preset that are not given here.

        Raises
        ------
        ConfigError
            If a key is unknown or a value is out of range.

        """
        updated = OrderedDict(self.values)
        origins = dict(self.origins)
        for name, value in values.items():
            key = name.replace('__', '.')
            if key not in DEFAULTS:
                raise ConfigError('unknown key {!r}'.format(key))
            if _KINDS[key] == 'floats':
                value = tuple(float(item) for item in value)
            elif _KINDS[key] == 'float':
                value = float(value)
            _check(key, value, None, None)
            updated[key] = value
            origins.pop(key, None)
        if 'experiment__preset' in values:
            given = set(name.replace('__', '.') for name in values)
            for key, value in PRESETS.get(updated['experiment.preset'], {}).items():
                if key not in given:
                    updated[key] = value
                    origins.pop(key, None)
        config = RunConfig(updated, origins)
        config.check_fields()
        return config

    def check_fields(self):
        """Raise ConfigError unless every field value lies in the mass-law domain.

        The error points at the line of the offending field key, or of the
        material key that moved the pole.

        """
        material = self.material
        for key in FIELD_KEYS:
            values = self.values[key]
            for B in values if isinstance(values, tuple) else (values,):
                try:
                    mat.check_field(B, material)
                except FieldDomainError as err:
                    origin = self.origins.get(key)
                    if origin is None:
                        moved = [k for k in POLE_KEYS if k in self.origins]
                        origin = self.origins[moved[-1]] if moved else (None, None)
                    raise ConfigError(str(err), *origin)

    def as_dict(self):
        """Return the values as a JSON-ready dict."""
        return OrderedDict((key, list(value) if isinstance(value, tuple) else value)
                           for key, value in self.values.items())

    def serialize(self):
        """Return the configuration as text that `parse_text` reads back equal.

        """
        return ''.join('{} = {}\n'.format(key, format_value(value))
                       for key, value in self.values.items())


def _check(key, value, source, lineno):
    kind = _KINDS[key]
    numbers = value if kind == 'floats' else (value,)
    if (kind in ('float', 'floats', 'optional-float') and value is not None
            and not all(math.isfinite(number) for number in numbers)):
        raise ConfigError('{} must be finite'.format(key), source, lineno)
    check = _CHECKS[key]
    problem = check(value) if check is not None and value is not None else None
    if problem:
        raise ConfigError('{} {}'.format(key, problem), source, lineno)


def _read_lines(lines, source, values, origins, numbers=None):
    for index, line in enumerate(lines):
        lineno = index + 1 if numbers is None else numbers[index]
        text = line.split('#', 1)[0].strip()
        if not text:
            continue
        if '=' not in text:
            raise ConfigError("expected 'key = value', not {!r}".format(text), source, lineno)
        key, value_text = (part.strip() for part in text.split('=', 1))
        if key not in DEFAULTS:
            raise ConfigError('unknown key {!r}'.format(key), source, lineno)
        try:
            value = _parse_value(key, value_text)
        except ValueError:
            raise ConfigError('{} has a malformed value {!r}'.format(key, value_text), source,
                              lineno)
        _check(key, value, source, lineno)
        values[key] = value
        origins[key] = (source, lineno)


def _fill_preset(values, origins):
    # Preset values take the origin of the preset line
    preset = values.get('experiment.preset', 'custom')
    for key, value in PRESETS.get(preset, {}).items():
        if key not in values:
            values[key] = value
            origins[key] = origins['experiment.preset']


def apply_preset(config, name):
    """Return the configuration with 'experiment.preset' and all its values set.

    Unlike naming the preset in configuration text, this replaces every
    value the preset holds.

    Raises
    ------
    ConfigError
        If `name` is not one of `PRESET_NAMES`.

    """
    values = {key.replace('.', '__'): value for key, value in PRESETS.get(name, {}).items()}
    values['experiment__preset'] = name
    return config.replace(**values)


def parse_text(text, source='<string>', overrides=()):
    """Return the RunConfig of configuration text plus 'key=value' overrides.

    Parameters
    ----------
    text : str
        The configuration text.
    source : str, optional
        The name used for the text in error messages (default '<string>').
    overrides : iterable of str, optional
        'key=value' strings applied after the text; errors in them are
        reported against '--set' and their position (default ()).

    Raises
    ------
    ConfigError
        On an unknown key, a malformed or out-of-range value, or a field
        beyond the mass-law pole, with the source and line at fault.

    """
    values, origins = OrderedDict(), {}
    _read_lines(text.splitlines(), source, values, origins)
    _read_lines(list(overrides), '--set', values, origins)
    _fill_preset(values, origins)

    config = RunConfig(values, origins)
    if config['threshold.p_min'] >= config['threshold.p_max']:
        raise ConfigError('threshold.p_min must be less than threshold.p_max',
                          *origins.get('threshold.p_max', origins.get('threshold.p_min',
                                                                      (source, None))))
    config.check_fields()
    return config


def parse_config(path=None, overrides=()):
    """Return the RunConfig of a configuration file plus 'key=value' overrides.

    Parameters
    ----------
    path : str, optional
        The file to read (default None, defaults only).
    overrides : iterable of str, optional
        'key=value' strings applied after the file (default ()).

    Raises
    ------
    ConfigError
        If the file cannot be read or holds an invalid entry.

    """
    text = ''
    if path is not None:
        try:
            with open(path, 'r') as config_file:
                text = config_file.read()
        except (IOError, OSError) as err:
            raise ConfigError('cannot read configuration: {}'.format(err.strerror), path)
    return parse_text(text, source=path or '<defaults>', overrides=overrides)


def serialize(config):
    """Return the text of a RunConfig; see `RunConfig.serialize`."""
    return config.serialize()
