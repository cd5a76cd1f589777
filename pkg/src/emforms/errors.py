"""Exception hierarchy shared by every emforms module."""

from __future__ import annotations


class EmformsError(Exception):
    """Base class for all library errors."""


class ArgumentError(EmformsError, ValueError):
    """Shape, arity or degree mismatch in an argument."""


class ParityError(EmformsError, TypeError):
    """An even form was used where an odd one is required, or vice versa."""


class ConfigurationError(EmformsError, ValueError):
    """Invalid configuration: missing frames, bad constitutive coefficients, ..."""


class UnsupportedDimensionError(EmformsError, ValueError):
    """Operation only defined for a specific ambient dimension."""


class SingularMapError(EmformsError, ArithmeticError):
    """A tangent map is (numerically) non-invertible."""


class PreconditionError(EmformsError, ValueError):
    """A checked precondition failed; ``residual`` carries the measured value."""

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


class ParseError(EmformsError, ValueError):
    """Syntax error in a field specification, with 1-based line and column."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column
        self.reason = message
