"""Exception hierarchy shared by every fdel module."""


class FDELError(Exception):
    """Base class for all library errors."""


class InvalidInputError(FDELError, ValueError):
    """Data or parameter values outside the supported domain."""


class InvalidRequestError(FDELError, ValueError):
    """A well-formed call that asks for something undefined (e.g. zero df)."""


class ConfigurationError(FDELError):
    """An estimating system is combined with an incompatible variant."""


class NumericalFailure(FDELError):
    """An iterative routine stopped without meeting its tolerance.

    The best iterate reached is kept on ``best`` so callers can inspect it.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class EmbeddingFailure(NumericalFailure):
    """Circulant embedding produced negative eigenvalues at every size tried."""


class EstimationFailure(NumericalFailure):
    """No feasible parameter value was found by the outer search."""


class InfeasibleError(FDELError):
    """Zero is not interior to the convex hull of the constraint vectors."""
