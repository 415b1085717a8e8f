"""Exception types shared across the package."""


class ParameterDomainError(ValueError):
    """A numeric argument fell outside its admissible domain."""


class ValidationError(ValueError):
    """A configuration object failed its consistency checks."""


class UnsupportedOracleError(ValueError):
    """The brute-force prox oracle cannot handle this objective."""


class InfeasibleError(ValueError):
    """No parameter value satisfies the requested constraints."""


class InsufficientDataError(ValueError):
    """Not enough samples for the requested computation."""


class DivergenceError(RuntimeError):
    """The trajectory norm exceeded the divergence guard.

    Carries ``t_last``, the last time with a finite, in-range state.
    """

    def __init__(self, message, t_last=None):
        # both args kept in .args so the exception survives pickling
        super().__init__(message, t_last)
        self.t_last = t_last

    def __str__(self):
        return str(self.args[0])


class StepSizeError(RuntimeError):
    """The adaptive controller drove the step below its minimum."""
