"""Exception hierarchy shared by the numerical modules and the CLI."""


class BoundedJumpsError(Exception):
    """Base class for all library errors."""


class DomainError(BoundedJumpsError, ValueError):
    """An argument lies outside the domain of the requested function."""


class ConvergenceError(BoundedJumpsError, ArithmeticError):
    """A series or iteration failed to converge.

    Carries the partial result and the number of terms used so callers can
    decide whether the partial value is still usable.
    """

    def __init__(self, message, partial=None, terms=None):
        super().__init__(message)
        self.partial = partial
        self.terms = terms


class ModelError(BoundedJumpsError, ValueError):
    """Model parameters violate the family's invariants."""


class UnsupportedModelError(BoundedJumpsError):
    """The model is valid but the requested computation does not apply to it."""


class BoundaryRootError(BoundedJumpsError):
    """A root of psi - q lies on (or numerically on) a contour."""


class PrecisionError(BoundedJumpsError):
    """Argument-principle winding did not resolve to an integer."""


class MultipleRootError(BoundedJumpsError):
    """Subdivision exceeded its depth budget, usually a multiple root."""

    def __init__(self, message, cell=None):
        super().__init__(message)
        self.cell = cell


class EnumerationError(BoundedJumpsError):
    """A root strip did not contain exactly the expected number of roots."""

    def __init__(self, message, strip=None, count=None):
        super().__init__(message)
        self.strip = strip
        self.count = count


class DegenerateRootError(BoundedJumpsError):
    """Two roots coincide or a root is numerically multiple."""
