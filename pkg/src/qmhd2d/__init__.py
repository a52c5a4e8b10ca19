"""qmhd2d: pseudo-spectral Faedo-Galerkin solver for 2-D quantum MHD.

Simulates the compressible quantum MHD system on the periodic box [0, 2pi)^2
with density-dependent viscosity and resistivity, a Bohm-type dispersive
stress, and the three regularization knobs of the approximation scheme
(Galerkin velocity cutoff, artificial density diffusion, high-order
momentum/density hyper-terms).  The diagnostics module audits the energy and
Bresch-Desjardins entropy budgets that structure the scheme.
"""

from .constitutive import ConstitutiveParams, ResistivityProfile
from .spectral import Grid, GalerkinBall, GalerkinVelocity
from .approximation import QMHDSystem, RegularizationParams, SolverOptions, State

__version__ = "0.1.0"

__all__ = [
    "ConstitutiveParams",
    "ResistivityProfile",
    "Grid",
    "GalerkinBall",
    "GalerkinVelocity",
    "QMHDSystem",
    "RegularizationParams",
    "SolverOptions",
    "State",
    "__version__",
]
