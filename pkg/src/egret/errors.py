"""Exception hierarchy.

Every numerical precondition failure is a :class:`DomainError`; the CLI maps
those (and :class:`ConfigError`) to exit code 1 and I/O failures to exit 2.
"""


class EgretError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(EgretError, ValueError):
    """An argument lies outside the domain of the operation."""


class DegenerateDistributionError(DomainError):
    """All selection weights are zero, so no distribution exists."""


class SingularityError(DomainError):
    """A reciprocal or negative power of zero was requested."""


class DivergenceError(DomainError):
    """The closed form has a pole at the requested point (e.g. tau = 0)."""


class ConfigError(EgretError, ValueError):
    """Invalid configuration, network file or generation parameters."""
