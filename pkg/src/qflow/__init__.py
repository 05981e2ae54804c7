"""Pseudospectral Carleson-norm toolkit and mild Navier-Stokes experiments.

Layers:
    fields      periodic grids, spectral transforms, calculus, dilation
    qafld       bit-exact field file format
    operators   Fourier-multiplier semigroups, Riesz transforms, Leray projection
    windows     Carleson windows, dyadic families, singular time quadrature
    norms       BMO / Morrey / Q-type norms and Carleson functionals
    embeddings  sharp Sobolev constants, Poisson energy identity, norm checks
    kernels     Schur bounds and weighted smoothing inequalities
    solver      global Picard iteration for the mild Navier-Stokes equation
    corpus      seeded synthetic fields
    service     FastAPI wrapper; cli is a thin client of it
"""

__version__ = "0.1.0"

from .fields import (  # noqa: F401
    Grid,
    ScalarField,
    SpectralField,
    VectorField,
    dilate,
    dilate_vector,
    divergence,
    forward_transform,
    gradient,
    inverse_transform,
    laplacian,
)
from .operators import (  # noqa: F401
    MultiplierSpec,
    apply_multiplier,
    fractional_laplacian,
    heat_extension,
    heat_semigroup,
    leray_project,
    poisson_semigroup,
    poisson_time_derivative,
    riesz_transform,
)
from .spacetime import SpaceTimeField  # noqa: F401
from .windows import CarlesonWindow, TimeQuadrature, WindowFamily  # noqa: F401
