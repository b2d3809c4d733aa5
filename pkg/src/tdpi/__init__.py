"""Numerical laboratory for a 3D time-dependent point interaction.

Solves the weakly singular Volterra charge equation, reconstructs the
effective unitary evolution, approximates it by Schrödinger dynamics with
rescaled zero-energy-resonant wells, certifies the resonances, and builds
the classical coherent-field configurations that induce those wells.
"""

__version__ = "0.1.0"
