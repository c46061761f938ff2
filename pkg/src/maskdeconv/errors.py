"""Exception types shared across the package."""


class MaskDeconvError(Exception):
    """Base class for all library errors."""


class DimensionError(MaskDeconvError, ValueError):
    """Raised when array shapes are incompatible with an operation."""


class ParameterError(MaskDeconvError, ValueError):
    """Raised when a scalar or configuration parameter is out of range."""


class NumericalError(MaskDeconvError, ArithmeticError):
    """Raised on numerical failure (divergence, CG breakdown)."""


class ImageIOError(MaskDeconvError, IOError):
    """Raised on unreadable, truncated, or unsupported image files."""
