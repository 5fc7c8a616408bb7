"""Exception taxonomy shared by all staleopt modules.

Every error raised by the library derives from :class:`StaleOptError`, so
callers (notably the CLI) can map failures onto exit codes without matching
on message strings.
"""


class StaleOptError(Exception):
    """Base class for all staleopt errors."""


class InvalidArgument(StaleOptError, ValueError):
    """A value passed to an operation violates its preconditions."""


class UnsupportedDomain(InvalidArgument):
    """The feasible set is unbounded, empty, or otherwise out of scope."""


class ConfigurationError(StaleOptError):
    """An experiment configuration is missing or has inconsistent fields."""


class MalformedInput(StaleOptError):
    """An input file could not be parsed; the message names the location."""


class InvalidLabel(MalformedInput):
    """A dataset label is not a valid class index."""


class ProtocolViolation(StaleOptError):
    """Operations of a stateful component were called out of order."""


class NumericError(StaleOptError):
    """A non-finite quantity surfaced mid-run; the run must abort."""


class OptimizerFailure(StaleOptError):
    """An inner deterministic solve did not converge within its budget."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class InvalidComparison(StaleOptError):
    """Two run records are not comparable (different problem or horizon)."""


class AuditViolation(StaleOptError):
    """A runtime invariant failed under audit; carries a full state dump."""

    def __init__(self, message, step=None, dump=None):
        super().__init__(message)
        self.step = step
        self.dump = dump or {}
