"""Exception types raised by srff."""


class SRFFError(Exception):
    """Base class for all srff errors."""


class DomainError(SRFFError, ValueError):
    """An argument lies outside the domain of a special function."""


class ConvergenceError(SRFFError, RuntimeError):
    """A numerical routine failed to reach its requested accuracy."""


class PreconditionError(SRFFError, ValueError):
    """Inputs violate a structural requirement (divisibility, shapes, ...)."""


class DataError(SRFFError, ValueError):
    """Malformed input data or rule/report files."""
