#!/usr/bin/env python
# coding: utf-8

from setuptools import find_packages, setup

setup(name="skinladder",
      description=
      "Liouvillian Skin Effect on a Measured-Feedback Two-Leg Fermionic Ladder",
      version="0.1.0",
      packages=find_packages(exclude=("tests",)),
      install_requires=["numpy>=1.17", "scipy>=1.4", "pyyaml>=5.1"],
      python_requires=">=3.6",
      entry_points={
          "console_scripts": [
              "skinladder = skinladder.tools.main:main",
          ]
      },
      package_data={'': ['*.md']},
      license="PSF",
      keywords="Lindblad;Liouvillian;Non-Hermitian;Quantum Trajectories")
