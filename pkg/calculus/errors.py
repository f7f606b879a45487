"""
Exception hierarchy shared by the calculus, geometry and verifier packages.

Every error is a ``ValueError`` so callers that only know the generic
contract still catch it.
"""
from typing import Optional, Sequence, Tuple


class GeometryError(ValueError):
    """Base class for all errors raised by this project."""


class DomainError(GeometryError):
    """A point lies outside the open set a map or chart is defined on."""


class ShapeError(GeometryError):
    """A vector or matrix has the wrong number of entries."""


class ParameterError(GeometryError):
    """A numerical parameter (step, tolerance, level index, ...) is invalid."""


class UnknownChartError(GeometryError):
    """A chart id does not exist in the atlas."""


class EmptyOverlapError(GeometryError):
    """No transition is declared between the requested charts."""


class ChartMismatchError(GeometryError):
    """Two objects expressed in different charts were combined directly."""


class NumericalRankError(GeometryError):
    """A differential or metric is singular (or numerically so) at a point."""

    def __init__(self, message: str, point: Optional[Sequence[float]] = None):
        super().__init__(message)
        self.point = None if point is None else tuple(float(c) for c in point)


class IncompatibilityError(GeometryError):
    """Two Christoffel fields violate the compatibility condition across a transition."""

    def __init__(self, message: str, residual: float, point: Sequence[float],
                 charts: Tuple[str, str]):
        super().__init__(message)
        self.residual = float(residual)
        self.point = tuple(float(c) for c in point)
        self.charts = charts


class ExtractionError(GeometryError):
    """Supplied fiber maps cannot come from a linear connection."""


class SingularLevelError(GeometryError):
    """A level block of a tower map is not invertible."""

    def __init__(self, message: str, level: int):
        super().__init__(message)
        self.level = level


class ReconstructionError(GeometryError):
    """A family of level data does not satisfy the tower compatibility relations."""

    def __init__(self, message: str, levels: Tuple[int, int], residual: float):
        super().__init__(message)
        self.levels = levels
        self.residual = float(residual)


class FixtureError(GeometryError):
    """A fixture file cannot be parsed or is inconsistent."""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        super().__init__(message)
        self.line = line
        self.column = column
