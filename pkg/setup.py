# Copyright: (C) 2026 The polariton developers
# License: GNU GPL version 3

import sys
from setuptools import setup

import polariton


FAILURE = '\033[1;31m' + 'Install cannot proceed.' + '\033[00m'


if len(sys.argv) > 1 and sys.argv[1] == 'install':
    # Check python version
    if sys.version_info < (3, 6):
        sys.exit(FAILURE + ' Sorry, Python 3.6 or above is required.')


setup(name='polariton',
      version=polariton.__version__,
      description='Polariton condensation kinetics in a magnetic field',
      long_description=polariton.__doc__,
      author=polariton.__author__,
      license=polariton.__license__,
      packages=['polariton'],
      scripts=['scripts/polariton'],
      install_requires=['numpy', 'scipy'],
      classifiers=[
          'Development Status :: 4 - Beta',
          'Environment :: Console',
          'Intended Audience :: Science/Research',
          'License :: OSI Approved :: GNU General Public License v3 (GPLv3)',
          'Operating System :: MacOS',
          'Operating System :: POSIX',
          'Programming Language :: Python :: 3 :: Only',
          'Topic :: Scientific/Engineering :: Physics'
          ]
     )
