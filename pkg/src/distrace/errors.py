"""Exception hierarchy shared by every module."""


class DistraceError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(DistraceError, ValueError):
    """Malformed input: wrong shape, non-finite entries, bad file format."""


class InvalidParameterError(DistraceError, ValueError):
    """A numeric parameter lies outside the operation's admissible range."""


class ContractViolationError(DistraceError, ValueError):
    """An input violates a structural contract (Hermiticity, parity, PSD)."""


class PreconditionViolationError(DistraceError, ValueError):
    """A spectral precondition (smallest singular value, eigenvalue floor) fails."""


class ScaleViolationError(PreconditionViolationError):
    """The matrix does not fit inside the requested block-encoding scale."""


class ApproximationError(DistraceError):
    """No polynomial up to the degree cap met the requested accuracy.

    Attributes:
        best_error: smallest certificate violation observed during the search.
        degree: degree at which ``best_error`` was reached.
    """

    def __init__(self, message, best_error=float("inf"), degree=None):
        super().__init__(message)
        self.best_error = best_error
        self.degree = degree


class InternalConsistencyError(DistraceError, RuntimeError):
    """A computed probability left [0, 1]; signals a norm violation upstream."""


class UnreliableLogError(DistraceError):
    """An estimated trace fell below the floor needed to take its logarithm."""
