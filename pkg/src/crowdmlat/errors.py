"""Exception hierarchy shared across the toolkit.

Argument-validation failures raise plain ValueError; the classes here cover
failures that callers may want to dispatch on (and that the CLI maps to
distinct exit codes: data-integrity errors -> 2, numerical errors -> 3).
"""


class ToolkitError(Exception):
    """Base class for all crowdmlat-specific errors."""


class InvalidCoordinateError(ToolkitError):
    """Coordinate outside its valid range (latitude, longitude, altitude, or
    an ECEF vector too far from the Earth's surface)."""


class ParseError(ToolkitError):
    """Malformed input file. Carries the offending path and line number."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f" [{path}" + (f":{line}" if line is not None else "") + "]"
        super().__init__(message + where)


class EmptyDataError(ParseError):
    """Input file contains no usable rows."""


class IntegrityError(ToolkitError):
    """Data violates a cross-record constraint (duplicate sensor ids,
    predictions for unknown records, ...)."""


class NoSolutionError(ToolkitError):
    """Position solver diverged away from the Earth's vicinity."""


class IllConditionedError(ToolkitError):
    """Solver geometry is singular; no usable position update exists."""


class SyncError(ToolkitError):
    """Clock-synchronization fit failed or cannot make progress. The message
    carries residual statistics or the list of unreachable sensors."""


class SplineRangeError(ToolkitError):
    """Random-walk spline evaluated outside its fitted knot span."""
