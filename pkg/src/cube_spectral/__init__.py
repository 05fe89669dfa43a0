"""Walsh-Fourier analysis, fractional heat semigroups and inequality
verification on the Hamming cube."""

__version__ = "0.1.0"

from .cube import (  # noqa: F401
    CubeFunction,
    DegreeMultiplier,
    Spectrum,
    apply_multiplier,
    degree_projection,
    dirichlet_form,
    expectation,
    fractional,
    fwht,
    gradient_sq,
    heat,
    ifwht,
    laplacian,
    lp_norm,
    partial_gradient,
)
from .errors import (  # noqa: F401
    ConstructionFailure,
    CubeSpectralError,
    InvalidInput,
    InvalidParameter,
    NumericFailure,
)
from .reports import RunManifest, VerificationReport  # noqa: F401
from .subordination import StableDensityEvaluator, stable_density, tail_constant  # noqa: F401
