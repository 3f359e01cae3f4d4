# Copyright: (C) 2026 The polariton developers
# License: GNU GPL version 3

"""Material constants and the closed-form magnetic-field laws.

Energies are in meV unless a name says otherwise, lengths in nm, times in
ps, and fields in T.

Examples
--------
>>> from polariton import material
>>> round(material.exciton_shift(2.0), 2)
0.34
>>> round(material.exciton_mass(2.0), 3)
0.574
>>> round(material.radius_ratio(6.0), 3)
0.895
>>> round(material.mass_pole(), 2)
6.35
>>> state = material.field_state(material.MaterialSet(), 0.0)
>>> state.radius_ratio, state.rabi_B, state.pp_matrix_element
(1.0, 5.0, 6000.0)

"""
import math
from collections import namedtuple

from scipy import constants

from polariton.error import FieldDomainError


# Unit conversions derived once from CODATA values
HBAR_MEV_PS = constants.hbar / constants.e * 1e3 * 1e12
HBAR_C_MEV_NM = constants.hbar * constants.c / constants.e * 1e3 * 1e9
HBAR2_2M0_MEV_NM2 = constants.hbar**2 / (2 * constants.m_e) / constants.e * 1e3 * 1e18
KB_MEV_PER_K = constants.k / constants.e * 1e3
# e/hbar in 1/(T nm^2), the magnetic length scale entering the radius ratio
E_OVER_HBAR_NM2 = constants.e / constants.hbar * 1e-18

BINDING_LAWS = ('inverse-radius', 'constant', 'proportional')


_MATERIAL_FIELDS = [
    ('electron_mass', 0.067),
    ('hole_mass', 0.45),
    ('dielectric_const', 11.9),
    ('qw_thickness', 5.0),
    ('qw_area', 100.0),
    ('mass_density', 5318.0),
    ('sound_velocity', 4720.0),
    ('deformation_potential_e', 7.0),
    ('deformation_potential_h', 2.7),
    ('bohr_radius', 10.0),
    ('binding_energy', 10.0),
    ('exciton_line', 1.515),
    ('photon_floor', 1.515),
    ('rabi_splitting', 5.0),
    ('photon_lifetime', 4.0),
    ('exciton_lifetime', 20.0),
    ('temperature', 4.0),
    ('shift_coeff', 0.085),
    ('mass_coeff', 0.048),
    ('binding_law', 'inverse-radius'),
]

# Fields that may be zero; every other numeric field must be positive
_NONNEGATIVE_FIELDS = {'deformation_potential_e', 'deformation_potential_h', 'temperature',
                       'shift_coeff', 'mass_coeff'}


class MaterialSet(namedtuple('MaterialSet', [name for name, _ in _MATERIAL_FIELDS])):
    """The static constants of a GaAs quantum well in a planar cavity.

    Parameters
    ----------
    electron_mass, hole_mass : float
        Effective masses in units of the free-electron mass.
    dielectric_const : float
        Background dielectric constant (greater than 1).
    qw_thickness : float
        Quantum-well width L_z in nm.
    qw_area : float
        Quantum-well area S in square micrometers.
    mass_density : float
        Mass density in kg/m^3.
    sound_velocity : float
        Longitudinal sound velocity in m/s.
    deformation_potential_e, deformation_potential_h : float
        Electron and hole deformation potentials in eV.
    bohr_radius : float
        Zero-field exciton Bohr radius a0 in nm.
    binding_energy : float
        Zero-field exciton binding energy E0 in meV.
    exciton_line : float
        Bare exciton line at k = 0 and B = 0 in eV.
    photon_floor : float
        Cavity photon energy at k = 0 in eV.
    rabi_splitting : float
        Zero-field Rabi splitting in meV.
    photon_lifetime, exciton_lifetime : float
        Lifetimes in ps.
    temperature : float
        Lattice temperature in K.
    shift_coeff : float
        Diamagnetic shift coefficient in meV/T^2.
    mass_coeff : float
        Mass-law coefficient in 1/(m0 T^2).
    binding_law : str
        How the binding energy follows the shrinking radius; one of
        `BINDING_LAWS`.

    All fields default to the GaAs values used throughout the package.

    Raises
    ------
    ValueError
        If a field is out of range.

    """
    __slots__ = ()

    def __new__(cls, *args, **kwargs):
        values = dict(_MATERIAL_FIELDS)
        values.update(zip(cls._fields, args))
        values.update(kwargs)
        self = super(MaterialSet, cls).__new__(cls, **values)
        self._validate()
        return self

    def _validate(self):
        for name, value in zip(self._fields, self):
            if name == 'binding_law':
                if value not in BINDING_LAWS:
                    raise ValueError('binding_law must be one of {}, not {!r}'.format(
                        ', '.join(BINDING_LAWS), value))
                continue
            if not math.isfinite(value):
                raise ValueError('{} must be finite'.format(name))
            if name in _NONNEGATIVE_FIELDS:
                if value < 0:
                    raise ValueError('{} must not be negative'.format(name))
            elif value <= 0:
                raise ValueError('{} must be positive'.format(name))
        if self.dielectric_const <= 1:
            raise ValueError('dielectric_const must exceed 1')

    @property
    def exciton_mass(self):
        """The zero-field exciton mass M_x = m_e + m_h in m0."""
        return self.electron_mass + self.hole_mass

    @property
    def area_nm2(self):
        """The quantum-well area in nm^2."""
        return self.qw_area * 1e6

    def _replace(self, **kwargs):
        return MaterialSet(**dict(self._asdict(), **kwargs))


FieldState = namedtuple('FieldState', ['material', 'B', 'delta_E', 'exciton_mass_B',
                                       'radius_ratio', 'rabi_B', 'binding_B',
                                       'pp_matrix_element'])
FieldState.__doc__ = """The field-dependent quantities derived from a MaterialSet at B.

Fields: material (the MaterialSet), B (T), delta_E (exciton shift, meV),
exciton_mass_B (m0), radius_ratio (a(B)/a0), rabi_B (meV), binding_B (meV),
and pp_matrix_element (M*S, meV nm^2).

"""

DEFAULT_MATERIAL = MaterialSet()


def _resolve(material):
    return DEFAULT_MATERIAL if material is None else material


def check_field(B, material=None):
    """Raise FieldDomainError unless B lies on the domain of the field laws.

    Parameters
    ----------
    B : float
        The field in T.
    material : MaterialSet, optional
        The material whose mass law bounds the domain (default the
        package defaults).

    Raises
    ------
    FieldDomainError
        If B is negative, not finite, or at or past the mass-law pole.

    """
    material = _resolve(material)
    if not math.isfinite(B) or B < 0:
        raise FieldDomainError('field must be a finite, non-negative number of tesla,'
                               ' not {!r}'.format(B))
    if 1.0 / material.exciton_mass - material.mass_coeff * B**2 <= 0:
        raise FieldDomainError('B = {!r} T is at or beyond the exciton mass pole at'
                               ' {:.3f} T'.format(B, mass_pole(material)))


def mass_pole(material=None):
    """Return the field in T at which the exciton mass law diverges.

    """
    material = _resolve(material)
    if material.mass_coeff == 0:
        return math.inf
    return math.sqrt(1.0 / (material.exciton_mass * material.mass_coeff))


def exciton_shift(B, material=None):
    """Return the diamagnetic shift D2*B^2 of the exciton line in meV.

    """
    material = _resolve(material)
    if not math.isfinite(B) or B < 0:
        raise FieldDomainError('field must be a finite, non-negative number of tesla,'
                               ' not {!r}'.format(B))
    return material.shift_coeff * B**2


def exciton_mass(B, material=None):
    """Return the field-dependent exciton mass in m0.

    Parameters
    ----------
    B : float
        The field in T.
    material : MaterialSet, optional
        The material (default the package defaults).

    Returns
    -------
    float
        (1/M_x - D_M*B^2)^-1, which is exactly M_x at B = 0.

    Raises
    ------
    FieldDomainError
        If B is negative or at or past the pole of the mass law.

    """
    material = _resolve(material)
    check_field(B, material)
    if B == 0:
        return material.exciton_mass
    return 1.0 / (1.0 / material.exciton_mass - material.mass_coeff * B**2)


def radius_ratio(B, material=None):
    """Return the ratio a(B)/a0 of the exciton Bohr radius in field.

    Parameters
    ----------
    B : float
        The field in T.
    material : MaterialSet, optional
        The material supplying a0 (default the package defaults).

    Returns
    -------
    float
        sqrt(2)*[1 + sqrt(1 + 1.5*(e*a0^2*B/hbar)^2)]^(-1/2), in (0, 1].

    """
    material = _resolve(material)
    if not math.isfinite(B) or B < 0:
        raise FieldDomainError('field must be a finite, non-negative number of tesla,'
                               ' not {!r}'.format(B))
    if B == 0:
        return 1.0
    flux = E_OVER_HBAR_NM2 * material.bohr_radius**2 * B
    return math.sqrt(2.0) / math.sqrt(1.0 + math.sqrt(1.0 + 1.5 * flux**2))


def rabi_splitting(B, material=None):
    """Return the field-enhanced Rabi splitting Omega_X*a0/a(B) in meV.

    """
    material = _resolve(material)
    return material.rabi_splitting / radius_ratio(B, material)


def binding_energy(B, material=None):
    """Return the exciton binding energy E0(B) in meV under the chosen law.

    With the default 'inverse-radius' law E0(B) = E0*a0/a(B); 'constant'
    keeps E0 and 'proportional' uses E0*a(B)/a0.

    """
    material = _resolve(material)
    ratio = radius_ratio(B, material)
    if material.binding_law == 'constant':
        return material.binding_energy
    if material.binding_law == 'proportional':
        return material.binding_energy * ratio
    return material.binding_energy / ratio


def pp_matrix_element(B, material=None):
    """Return the polariton-polariton matrix element times area, in meV nm^2.

    The exchange estimate 6*E0(B)*a(B)^2 of a pair of 2D excitons; divide by
    the well area (in nm^2) for the matrix element itself.

    """
    material = _resolve(material)
    radius = material.bohr_radius * radius_ratio(B, material)
    return 6.0 * binding_energy(B, material) * radius * radius


def field_state(material, B):
    """Return the FieldState of the material at field B.

    Raises
    ------
    FieldDomainError
        If B is outside the domain of the mass law.

    """
    material = _resolve(material)
    check_field(B, material)
    return FieldState(material=material,
                      B=float(B),
                      delta_E=exciton_shift(B, material),
                      exciton_mass_B=exciton_mass(B, material),
                      radius_ratio=radius_ratio(B, material),
                      rabi_B=rabi_splitting(B, material),
                      binding_B=binding_energy(B, material),
                      pp_matrix_element=pp_matrix_element(B, material))
