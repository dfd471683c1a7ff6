"""Exception hierarchy shared by all modules."""


class GWBoundsError(Exception):
    """Base class for all library errors."""


class ValidationError(GWBoundsError, ValueError):
    """An input object violates one of its invariants."""


class NonFiniteError(ValidationError):
    pass


class ShapeError(ValidationError):
    pass


class AsymmetryError(ValidationError):
    pass


class DiagonalError(ValidationError):
    pass


class NegativeEntryError(ValidationError):
    pass


class WeightSumError(ValidationError):
    pass


class TriangleInequalityError(ValidationError):
    pass


class FeatureRowMismatchError(ValidationError):
    pass


class DimensionMismatchError(ValidationError):
    pass


class DomainError(GWBoundsError, ValueError):
    """A scalar parameter lies outside its admissible domain."""


class UnsupportedOrderError(DomainError):
    """A sliced bound was requested with an order other than p = 2."""


class ParseError(GWBoundsError, ValueError):
    """A file could not be parsed; the message carries the location."""

    def __init__(self, path, message, line=None, field=None):
        self.path = str(path)
        self.line = line
        self.field = field
        where = self.path
        if line is not None:
            where += f":{line}"
        if field is not None:
            where += f" [{field}]"
        super().__init__(f"{where}: {message}")


class ConvergenceError(GWBoundsError, RuntimeError):
    """An iterative solver failed to reach its tolerance."""


class ConvergenceWarning(UserWarning):
    pass
