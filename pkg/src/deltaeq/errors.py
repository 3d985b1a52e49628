"""Exception types shared across the package."""


class DeltaEqError(Exception):
    """Base class for every error this package raises on purpose."""


class NonIncreasingPoints(DeltaEqError, ValueError):
    """Grid points must be strictly increasing."""


class TooFewPoints(DeltaEqError, ValueError):
    """A time scale needs at least three points."""


class BadFamilyParam(DeltaEqError, ValueError):
    """Invalid parameter for a grid-family constructor."""


class OutOfKappa(DeltaEqError, IndexError):
    """The forward jump is undefined at the final grid point."""


class GridMismatch(DeltaEqError, ValueError):
    """Operands live on different time scales."""


class NotRegressive(DeltaEqError, ValueError):
    """1 + mu*g vanishes (within tolerance) where it must not."""

    def __init__(self, message, index=None, value=None):
        super().__init__(message)
        self.index = index
        self.value = value


class ZeroDenominator(DeltaEqError, ZeroDivisionError):
    """y_i(t) * y_i(sigma(t)) vanishes where a construction divides by it."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class NotHomogeneousSolution(DeltaEqError, ValueError):
    """A grid function passed off as a homogeneous solution fails its residual check."""


class SingularWronskian(DeltaEqError, ValueError):
    """The Wronskian vanishes where a construction divides by it."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class DegenerateRoots(DeltaEqError, ValueError):
    """Characteristic roots coincide; the two-root closed form does not apply."""


class ComplexRoots(DeltaEqError, ValueError):
    """Characteristic roots are complex; only the real case is supported."""


class ZeroBeta(DeltaEqError, ValueError):
    """The trailing shift coefficient must be nonzero everywhere."""


class ConfigError(DeltaEqError, ValueError):
    """Problem-config text could not be used.  Carries a 1-based line number when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ParseError(ConfigError):
    """Config text is syntactically malformed."""


class ValidationError(ConfigError):
    """Config text parsed but describes an invalid problem."""
