"""Exception hierarchy shared by all modules."""


class CubeSpectralError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInput(CubeSpectralError, ValueError):
    """A function/spectrum argument violates its invariants."""


class InvalidParameter(CubeSpectralError, ValueError):
    """A scalar parameter is outside its admissible range."""


class NumericFailure(CubeSpectralError, RuntimeError):
    """A quadrature or iteration did not reach the requested accuracy.

    Carries the best error estimate achieved so callers can decide
    whether the partial result is still usable.
    """

    def __init__(self, message, achieved_error=None):
        super().__init__(message)
        self.achieved_error = achieved_error


class ConstructionFailure(CubeSpectralError, RuntimeError):
    """A derived object (bump, plan) could not be built as requested."""
