"""Classical and quantum phase-space dynamics of a coherent state in a Kerr oscillator.

Wigner and chord functions, their truncated (classical) approximations,
blind spots of the chord function, moments and local correlations.
Units: ``x = (p, q)``, ``xi = (xi_p, xi_q)``, ``hbar`` a runtime parameter.
"""
__version__ = "0.1.0"

from .core import (CHORD_AXES, DEFAULT_CONSTANTS, WIGNER_AXES, Chord, CoherentParams,  # noqa: E402
                   ComplexField2D, Constants, GridSpec, PhasePoint, grid_points)

__all__ = ["CHORD_AXES", "DEFAULT_CONSTANTS", "WIGNER_AXES", "Chord", "CoherentParams",
           "ComplexField2D", "Constants", "GridSpec", "PhasePoint", "grid_points", "__version__"]
