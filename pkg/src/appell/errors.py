"""Exception types raised by the package."""


class AppellError(Exception):
    """Base class for all package errors."""


class ShapeError(AppellError, ValueError):
    """Degree or dimension mismatch between tensors, series or systems."""


class SingularGermError(AppellError, ZeroDivisionError):
    """A power series with vanishing constant term cannot be inverted."""


class DegenerateMeasureError(AppellError, ValueError):
    """Some nonzero polynomial of admissible degree vanishes almost everywhere."""


class DomainError(AppellError, ValueError):
    """An argument lies outside the region where a germ is defined."""


class UnsupportedError(AppellError, NotImplementedError):
    """The requested operation is not available for this measure or dimension."""


class MalformedGermError(AppellError, ValueError):
    """A symbol germ has a block that is not bihomogeneous of its declared degree."""


class ExtractionError(AppellError, RuntimeError):
    """Cauchy-FFT coefficient extraction did not converge on the chosen circles."""
