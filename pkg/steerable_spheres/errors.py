"""Exception types raised by the library.

Every error derives from ``SteerableError``, itself a ``ValueError``, so
callers that only care about invalid input can keep catching ``ValueError``.
"""

from __future__ import annotations


class SteerableError(ValueError):
    """Base class for all library errors."""


class DegenerateDirection(SteerableError):
    """A direction vector is too short to define a rotation."""


class DegenerateScale(SteerableError):
    """A learned sphere has a vanishing scale and cannot be normalized.

    ``location`` is the ``(hidden_unit, point)`` index when the sphere comes
    from a model, otherwise ``None``.
    """

    def __init__(self, message: str, location: tuple[int, int] | None = None) -> None:
        if location is not None:
            message = f"{message} (hidden unit {location[0]}, point {location[1]})"
        super().__init__(message)
        self.location = location


class ShapeMismatch(SteerableError):
    """An array does not have the shape the model expects."""


class BadLabel(SteerableError):
    """A class label is outside the range of known classes."""


class NonFinite(SteerableError):
    """A loss or parameter became NaN or infinite."""


class NegativeAmplitude(SteerableError):
    """A noise amplitude is negative."""


class DegenerateAnchors(SteerableError):
    """The anchor triangle of a pose is too small to define a plane."""


class ParseError(SteerableError):
    """A file or config could not be parsed.

    ``line`` is the 1-based line number and ``field`` the offending field
    name, when known.
    """

    def __init__(self, message: str, line: int | None = None, field: str | None = None) -> None:
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
        self.line = line
        self.field = field


class SchemaMismatch(SteerableError):
    """A file declares an unknown schema, or two models do not belong together."""
