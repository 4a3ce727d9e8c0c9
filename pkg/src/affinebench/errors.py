"""Exception hierarchy shared across the package.

The four categories surfaced by the CLI carry distinct exit codes so
shell pipelines can react to the failure class.
"""


class AffineBenchError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ConfigError(AffineBenchError):
    """Invalid or unreadable experiment configuration."""

    exit_code = 2


class DataError(AffineBenchError):
    """Missing or malformed artifact (suite, features, performance data)."""

    exit_code = 3


class CapacityError(AffineBenchError):
    """A selection request exceeds what the instance pool can provide."""

    exit_code = 4


class StalenessError(AffineBenchError):
    """An artifact was produced under a different configuration hash."""

    exit_code = 5


class DomainError(AffineBenchError, ValueError):
    """An argument violates an operation's contract."""


class RegistryError(DomainError):
    """Unknown component-function id."""


class SampleSizeError(DomainError):
    """Sample too small for feature computation."""


class DegenerateComponentError(AffineBenchError):
    """A component instance shows no measurable precision range."""


class PruningError(AffineBenchError):
    """Feature pruning removed every feature."""
