"""Shared exception types."""


class SchifferError(Exception):
    """Base class for all package errors."""


class DomainError(SchifferError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class GridMismatchError(SchifferError, ValueError):
    """A field does not live on the grid it is being combined with."""


class AdmissibilityError(SchifferError, RuntimeError):
    """A boundary profile left the admissible set (degenerate domain)."""


class InternalConsistencyError(SchifferError, RuntimeError):
    """A quantity that must hold by construction failed its self-check."""


class NoConvergenceError(SchifferError, RuntimeError):
    """An iterative solve did not reach its tolerance."""


class ConfigError(SchifferError, ValueError):
    """Invalid run configuration."""
