"""Exception taxonomy shared across the package.

The CLI maps these onto its exit codes: ValidationError (and subclasses)
exit 2, any other ReddpipeError exit 3.
"""


class ReddpipeError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(ReddpipeError):
    """Invalid user-supplied data, configuration, or arguments."""


class CorpusError(ValidationError):
    """Malformed corpus/log files or records violating corpus invariants."""


class DimensionError(ValidationError):
    """Vector or matrix dimensions do not match the declared shapes."""


class NotFoundError(ReddpipeError):
    """A referenced resource (queue, topic, model version) does not exist."""


class ConflictError(ReddpipeError):
    """Operation conflicts with current state (frozen, busy, stale)."""
