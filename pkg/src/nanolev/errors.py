"""Exception hierarchy.

Every error raised for bad physical input derives from ``ValueError`` so
callers that only care about "bad input" can catch that.
"""


class DomainError(ValueError):
    """Input outside the domain where a model is defined."""


class InversionError(ValueError):
    """A bracketed inversion found no root."""


class CalibrationError(InversionError):
    """Strain calibration has no solution in its search bracket."""


class FitError(RuntimeError):
    """A least-squares fit did not converge.

    ``best`` holds the best-so-far result object (same type a successful
    fit would return) so callers can still inspect it.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best
