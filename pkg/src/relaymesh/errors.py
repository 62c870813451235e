"""Exception types shared across the package."""


class RelayMeshError(Exception):
    """Base class for all package errors."""


class DomainError(RelayMeshError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ValidationError(RelayMeshError, ValueError):
    """A network, profile or config failed validation."""


class UsageError(RelayMeshError, ValueError):
    """An operation was called on an unsupported configuration (e.g. wrong T)."""


class CapacityError(RelayMeshError):
    """An enumeration would exceed the configured size cap."""


class InfeasibleError(RelayMeshError):
    """A feasibility search found no feasible point in its interval."""


class SearchBoundError(RelayMeshError):
    """A bounded search could not reach its target before the ceiling.

    ``achieved`` holds the best value of the monitored quantity at the ceiling.
    """

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class NonFiniteError(RelayMeshError, ArithmeticError):
    """An objective returned NaN; ``argument`` is the offending input."""

    def __init__(self, message, argument=None):
        super().__init__(message)
        self.argument = argument


class ConvergenceWarning(UserWarning):
    """An iterative optimiser stopped at its iteration limit."""
