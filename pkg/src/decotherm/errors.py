"""Exception types shared across the package."""


class ValidationError(ValueError):
    """An input fails a structural invariant (shape, hermiticity, trace, ...)."""


class SupportError(ValueError):
    """The support condition of a relative entropy is violated."""


class NotDephasingError(ValueError):
    """A generator does not have pure-decoherence structure in the given basis."""


class NoFixedPointError(RuntimeError):
    """No instantaneous fixed point found at the requested tolerance."""


class UnsupportedCombinationError(ValueError):
    """A quantity was requested for parameters where it is not defined."""


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to converge.

    Carries the last two estimates so the caller can judge how far apart
    the refinement levels still are.
    """

    def __init__(self, message, previous_estimate, last_estimate):
        super().__init__(
            f"{message} (previous estimate {previous_estimate!r}, "
            f"last estimate {last_estimate!r})"
        )
        self.previous_estimate = previous_estimate
        self.last_estimate = last_estimate


class IntegrationDriftError(RuntimeError):
    """State integration drifted outside tolerance (try a smaller step)."""


class ConsistencyError(RuntimeError):
    """Two independent computation routes disagree beyond tolerance."""
