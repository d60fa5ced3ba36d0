"""Exception types raised across the package."""


class DegenParaError(Exception):
    """Base class for all package errors."""


class DomainError(DegenParaError, ValueError):
    """A point lies outside the closed space-time domain."""


class ConfigurationError(DegenParaError, ValueError):
    """Inconsistent problem, grid or run configuration."""


class ClassificationError(DegenParaError, ValueError):
    """Boundary advection changes sign over the sampled times."""


class PreconditionError(DegenParaError, ValueError):
    """A diagnostic was requested on data that does not satisfy its assumptions."""


class StabilityError(DegenParaError, RuntimeError):
    """Strict mode refused to run a problem/grid pair.

    The offending :class:`~degenpara.scheme.StabilityReport` is kept on
    ``report``.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class SolverError(DegenParaError, RuntimeError):
    """The implicit step could not be solved or produced non-finite values."""

    def __init__(self, message, step=None, node=None):
        super().__init__(message)
        self.step = step
        self.node = node
