# Copyright: (C) 2026 The polariton developers
# License: GNU GPL version 3

"""Exciton, cavity-photon, and lower-polariton dispersions.

The public functions take wavenumbers in 1/nm (scalars or arrays) and
return energies in eV, as reported in exports. `tabulate` returns the same
quantities in meV measured from the bare exciton line, which is what the
grid and the scattering kernels work with; written that way the lower
branch is free of cancellation between numbers near 1.5 eV.

Examples
--------
>>> from polariton import dispersion, material
>>> field = material.field_state(material.MaterialSet(), 0.0)
>>> round(dispersion.photon_energy(0.02), 3)
1.898
>>> round(dispersion.lower_polariton_energy(0.0, field), 4)
1.5125
>>> dispersion.hopfield_fractions(0.0, field)
(0.5, 0.5)
>>> round(dispersion.polariton_lifetime(0.0, field), 3)
6.667

"""
from collections import namedtuple

import numpy as np

from polariton import material as mat


DispersionPoint = namedtuple('DispersionPoint', ['k', 'E_x', 'E_c', 'E_lp', 'x2', 'c2', 'dE_dk',
                                                 'd2E_dk2', 'tau'])
DispersionPoint.__doc__ = """One sample of the lower-polariton dispersion.

Fields: k (1/nm), E_x, E_c, E_lp (eV), x2 and c2 (exciton and photon
fractions), dE_dk (eV nm), d2E_dk2 (eV nm^2), and tau (ps).

"""

DispersionTable = namedtuple('DispersionTable', ['k', 'exciton', 'photon', 'lower', 'x2', 'c2',
                                                 'slope', 'curvature', 'lifetime'])
DispersionTable.__doc__ = """Dispersion arrays in meV measured from the bare exciton line.

Fields: k (1/nm), exciton, photon, lower (meV offsets), x2, c2, slope
(meV nm), curvature (meV nm^2), and lifetime (ps).

"""


def _wavenumbers(k):
    k_arr = np.asarray(k, dtype=float)
    if np.any(k_arr < 0) or not np.all(np.isfinite(k_arr)):
        raise ValueError('wavenumbers must be finite and non-negative')
    return k_arr


def _finish(value, k):
    # Plain floats for scalar input, arrays otherwise
    if np.ndim(k) == 0:
        return float(value)
    return value


def _exciton_branch(k, field):
    # Offset, slope, and curvature of the bare exciton in meV units
    kinetic = mat.HBAR2_2M0_MEV_NM2 / field.exciton_mass_B
    offset = field.delta_E + kinetic * k * k
    return offset, 2.0 * kinetic * k, np.full_like(k, 2.0 * kinetic)


def _photon_branch(k, material):
    floor = material.photon_floor * 1e3
    kinetic = (mat.HBAR_C_MEV_NM * k)**2 / material.dielectric_const
    energy = np.sqrt(floor * floor + kinetic)
    # Rationalized so the offset stays exact when it is small next to floor
    offset = (floor - material.exciton_line * 1e3) + kinetic / (floor + energy)
    scale = mat.HBAR_C_MEV_NM**2 / material.dielectric_const
    slope = scale * k / energy
    curvature = scale * floor * floor / energy**3
    return offset, slope, curvature


def _mix(k, field):
    # Lower branch of the coupled-oscillator problem with its derivatives
    ex, ex_slope, ex_curv = _exciton_branch(k, field)
    ph, ph_slope, ph_curv = _photon_branch(k, field.material)
    rabi = field.rabi_B
    detuning = ex - ph
    root = np.hypot(detuning, rabi)

    exciton_like = detuning <= 0
    far = root + np.abs(detuning)
    # The minority fraction of each branch, formed without cancellation
    minority = rabi * rabi / (2.0 * root * far)
    majority = far / (2.0 * root)
    x2 = np.where(exciton_like, majority, minority)
    c2 = np.where(exciton_like, minority, majority)
    lower = np.where(exciton_like, ex, ph) - rabi * rabi / (2.0 * far)

    detuning_slope = ex_slope - ph_slope
    slope = x2 * ex_slope + c2 * ph_slope
    curvature = (x2 * ex_curv + c2 * ph_curv
                 - 0.5 * detuning_slope**2 * rabi * rabi / root**3)
    return ex, ph, lower, x2, c2, slope, curvature


def tabulate(k, field):
    """Return the dispersion at the wavenumbers as a DispersionTable.

    Parameters
    ----------
    k : array_like
        Wavenumbers in 1/nm.
    field : FieldState
        The field-dressed material.

    Returns
    -------
    DispersionTable
        Energies in meV relative to the bare exciton line, Hopfield
        fractions, first and second derivatives of the lower branch, and
        the mode lifetimes.

    """
    k_arr = np.atleast_1d(_wavenumbers(k))
    ex, ph, lower, x2, c2, slope, curvature = _mix(k_arr, field)
    material = field.material
    lifetime = 1.0 / (c2 / material.photon_lifetime + x2 / material.exciton_lifetime)
    return DispersionTable(k=k_arr, exciton=ex, photon=ph, lower=lower, x2=x2, c2=c2,
                           slope=slope, curvature=curvature, lifetime=lifetime)


def lower_polariton_offset(k, field):
    """Return the lower-polariton energy in meV above the bare exciton line.

    """
    k_arr = _wavenumbers(k)
    lower = _mix(np.atleast_1d(k_arr), field)[2]
    return _finish(lower.reshape(k_arr.shape), k)


def exciton_energy(k, field):
    """Return the exciton energy in eV at wavenumber k (1/nm).

    """
    k_arr = _wavenumbers(k)
    offset = _exciton_branch(k_arr, field)[0]
    return _finish((field.material.exciton_line * 1e3 + offset) / 1e3, k)


def photon_energy(k, material=None):
    """Return the cavity-photon energy in eV at wavenumber k (1/nm).

    Parameters
    ----------
    k : float or array_like
        Wavenumber in 1/nm.
    material : MaterialSet, optional
        The material (default the package defaults).

    """
    material = mat.DEFAULT_MATERIAL if material is None else material
    k_arr = _wavenumbers(k)
    offset = _photon_branch(k_arr, material)[0]
    return _finish((material.exciton_line * 1e3 + offset) / 1e3, k)


def lower_polariton_energy(k, field):
    """Return the lower-polariton energy in eV at wavenumber k (1/nm).

    """
    k_arr = _wavenumbers(k)
    lower = _mix(np.atleast_1d(k_arr), field)[2].reshape(k_arr.shape)
    return _finish((field.material.exciton_line * 1e3 + lower) / 1e3, k)


def hopfield_fractions(k, field):
    """Return the exciton and photon fractions (x2, c2) at wavenumber k.

    Both lie in [0, 1] and sum to 1; exact resonance gives (0.5, 0.5).

    """
    k_arr = _wavenumbers(k)
    _, _, _, x2, c2, _, _ = _mix(np.atleast_1d(k_arr), field)
    return _finish(x2.reshape(k_arr.shape), k), _finish(c2.reshape(k_arr.shape), k)


def dispersion_derivatives(k, field):
    """Return dE/dk (eV nm) and d2E/dk2 (eV nm^2) of the lower polariton.

    The derivatives are analytic: the slope is the Hopfield-weighted mean
    of the bare slopes and the curvature carries the extra level-repulsion
    term.

    """
    k_arr = _wavenumbers(k)
    _, _, _, _, _, slope, curvature = _mix(np.atleast_1d(k_arr), field)
    return (_finish(slope.reshape(k_arr.shape) / 1e3, k),
            _finish(curvature.reshape(k_arr.shape) / 1e3, k))


def polariton_lifetime(k, field):
    """Return the lifetime in ps, (c2/tau_c + x2/tau_x)^-1, at wavenumber k.

    """
    k_arr = _wavenumbers(k)
    lifetime = tabulate(np.atleast_1d(k_arr), field).lifetime
    return _finish(lifetime.reshape(k_arr.shape), k)


def dispersion_point(k, field):
    """Return the DispersionPoint at a single wavenumber k (1/nm).

    """
    table = tabulate(float(k), field)
    line = field.material.exciton_line * 1e3
    return DispersionPoint(k=float(k),
                           E_x=float(line + table.exciton[0]) / 1e3,
                           E_c=float(line + table.photon[0]) / 1e3,
                           E_lp=float(line + table.lower[0]) / 1e3,
                           x2=float(table.x2[0]),
                           c2=float(table.c2[0]),
                           dE_dk=float(table.slope[0]) / 1e3,
                           d2E_dk2=float(table.curvature[0]) / 1e3,
                           tau=float(table.lifetime[0]))
