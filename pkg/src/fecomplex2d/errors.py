"""Exception hierarchy shared by every module of the package."""


class FecError(Exception):
    """Base class for all package errors."""


class ParameterError(FecError, ValueError):
    """A smoothness vector or degree violates an admissibility inequality."""


class ShapeError(FecError, ValueError):
    """Matrix or field shapes do not match."""


class SingularMatrix(FecError, ArithmeticError):
    """Inversion of a rank deficient square matrix was requested."""


class DependentColumnsError(FecError, ValueError):
    """A basis was expected but the supplied columns are linearly dependent."""


class GeometryError(FecError, ValueError):
    """Degenerate triangle or malformed vertex data."""


class TopologyError(FecError, ValueError):
    """Non conforming mesh: hanging node or edge shared by more than two cells."""


class ParseError(FecError, ValueError):
    """Malformed mesh document or rational literal."""


class InclusionError(FecError):
    """An operator does not map its source space into the target space."""


class QuotientError(FecError):
    """A quotient moment space cannot be realised for the given ambient space."""
