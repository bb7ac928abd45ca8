"""Exception hierarchy used across the package."""


class GapforgeError(Exception):
    """Base class for all package errors."""


class PreconditionError(GapforgeError, ValueError):
    """An operation was called outside the range where it is defined."""


class GeometryError(GapforgeError, ValueError):
    """Degenerate geometric input (coincident points, cut locus, ...)."""


class ChartError(GapforgeError, ValueError):
    """A point or quantity is not available in the requested chart."""


class ConvergenceError(GapforgeError, RuntimeError):
    """A numerical solver failed to produce a trustworthy answer.

    Attributes
    ----------
    diagnostics : dict
        Whatever the solver could report (residuals, iteration counts...).
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class ConfigError(GapforgeError, ValueError):
    """Malformed experiment configuration."""

    def __init__(self, message, line=None, source=None):
        where = ""
        if source is not None:
            where += f"{source}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}".strip() if where else message)
        self.line = line
        self.source = source
