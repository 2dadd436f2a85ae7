"""Exception and warning types raised across the package."""


class InverseSourceError(Exception):
    """Base class for all package errors."""


class GridError(InverseSourceError, ValueError):
    """Bad grid construction, truncation beyond the grid, or boundary violation."""


class DomainError(InverseSourceError, ValueError):
    """An argument lies outside the domain of the operation."""


class QuadratureLayoutError(InverseSourceError, ValueError):
    """A time grid cannot carry the composite Simpson layout (odd L)."""


class DimensionMismatchError(InverseSourceError, ValueError):
    """Truncation orders of two spectral objects disagree."""


class SingularOperatorError(InverseSourceError, ArithmeticError):
    """A weight integral vanished where an inverse was requested."""


class DegenerateDataError(InverseSourceError, ValueError):
    """Data with zero norm where a positive norm is required."""


class DiscrepancyInfeasibleError(InverseSourceError):
    """tau * epsilon is not below the data norm, so no discrepancy root exists."""


class NumericalFailure(InverseSourceError, RuntimeError):
    """An iterative procedure failed to bracket or converge."""


class ConfigError(InverseSourceError, ValueError):
    """Invalid run configuration."""


class InverseSourceWarning(UserWarning):
    """Non-fatal condition worth recording in a run log (clamps, snapping, sign dips)."""
