"""Exception types shared across the package.

The CLI maps these onto exit codes: configuration problems exit with 1,
assumption/certification failures with 2, numerical breakdown with 3.
"""


class ConfigError(ValueError):
    """Invalid configuration, file, or argument."""


class CoefficientError(ValueError):
    """Coefficient data unusable (e.g. a characteristic speed hits zero)."""


class AssumptionError(RuntimeError):
    """Base class for failures of the design hypotheses."""


class StabilityError(AssumptionError):
    """The system matrix is not Hurwitz."""


class RankConditionError(AssumptionError):
    """A steady-state input/output map is numerically rank deficient."""

    def __init__(self, which, cond):
        super().__init__(f"{which} is rank deficient (condition number {cond:.3e})")
        self.which = which
        self.cond = cond


class CertificationError(AssumptionError):
    """No feasible Lyapunov weight found in the search family."""

    def __init__(self, message, best_margin=None):
        if best_margin is not None:
            message = f"{message} (best margin found: {best_margin:.6e})"
        super().__init__(message)
        self.best_margin = best_margin


class NumericalFailure(RuntimeError):
    """NaN or Inf encountered while producing results."""
