"""Exception types shared across the package."""


class LevyFluctError(Exception):
    """Base class for all package errors."""


class ModelError(LevyFluctError):
    """Invalid process specification (bad parameters, excluded path type, ...)."""


class SpecError(LevyFluctError):
    """A problem/model spec file failed to parse or validate.

    ``field`` carries a dotted path into the offending spec entry when known.
    """

    def __init__(self, message, field=None):
        super().__init__(message if field is None else f"{field}: {message}")
        self.field = field


class NumericalAccuracyError(LevyFluctError):
    """A quadrature or inversion failed to meet its tolerance.

    ``achieved`` carries the error estimate that was actually attained.
    """

    def __init__(self, message, achieved=None):
        if achieved is not None:
            message = f"{message} (achieved error estimate {achieved:.3e})"
        super().__init__(message)
        self.achieved = achieved


class RootFindingError(LevyFluctError):
    """Bracketing or convergence failure in a scalar root search."""


class ConditionNotMetError(LevyFluctError):
    """A formula was requested whose admissibility conditions do not hold."""


class HypothesisViolationError(LevyFluctError):
    """A numerically checked integrability hypothesis failed (e.g. divergent tail integral)."""


class UnsupportedCaseError(LevyFluctError):
    """The requested case is deliberately not handled (see docstring of the caller)."""
