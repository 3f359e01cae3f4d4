# Copyright: (C) 2026 The polariton developers
# License: GNU GPL version 3

"""Kinetics of exciton-polariton condensation in a magnetic field.

Modules for the field-dressed material laws, the lower-polariton dispersion,
the radial k-grid, precomputed polariton-phonon and polariton-polariton
scattering kernels, the Boltzmann integrator, and the batch protocols
(threshold search, S-curves, field and pump-position sweeps) built on them.

"""
__version__ = '1.0.0'
__license__ = 'GPL3'
__author__ = __maintainer__ = 'The polariton developers'
