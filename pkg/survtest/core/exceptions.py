"""Custom exceptions for survtest."""


class SurvTestError(Exception):
    """Base exception for all survtest errors."""

    pass


class InvalidInputError(SurvTestError):
    """Malformed observations, arguments or weight specification."""

    pass


class ConfigError(SurvTestError):
    """Simulation or study configuration failed validation."""

    pass


class NoObservableCategoriesError(SurvTestError):
    """No pooled event inside the range where every group is at risk."""

    pass


class QuantileNotAttainedError(SurvTestError):
    """Cumulative pooled events never reach the requested fraction."""

    pass


class NumericalError(SurvTestError):
    """Invalid input to a numeric kernel (non-finite entries, bad shapes)."""

    pass


class NotComputableError(SurvTestError):
    """The statistic exists but its null law cannot be evaluated on this sample."""

    pass


class DegenerateCovarianceError(NotComputableError):
    """Reduced covariance matrix is singular to tolerance."""

    pass


class GateError(NotComputableError):
    """Covariance operator estimate has a materially negative eigenvalue."""

    pass


class SimulationError(SurvTestError):
    """Every replication of a simulation was flagged."""

    pass


class SingularMatrixError(NumericalError):
    """Factorization broke down or the reciprocal condition is below tolerance."""

    pass
