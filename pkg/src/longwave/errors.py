"""Exception hierarchy.

Errors split into two families so that front-ends can map them to exit
codes: :class:`UserError` for bad inputs and :class:`NumericalError` for
failures of a numerical routine on otherwise valid inputs.
"""


class LongwaveError(Exception):
    """Base class of all package errors."""


class UserError(LongwaveError, ValueError):
    """Invalid input supplied by the caller."""


class NumericalError(LongwaveError, ArithmeticError):
    """A numerical routine failed on valid input."""


# user errors
class InputTooShort(UserError):
    pass


class NonFiniteInput(UserError):
    pass


class DomainError(UserError):
    pass


class InvalidD(UserError):
    pass


class NonPsdSigma(UserError):
    pass


class DimensionMismatch(UserError):
    pass


class EmptyPyramid(UserError):
    pass


class EmptyScales(UserError):
    pass


class DegenerateScale(UserError):
    pass


# numerical errors
class NumericalResidual(NumericalError):
    pass


class FactorizationFailed(NumericalError):
    pass


class DegenerateDenominator(NumericalError):
    pass


class SingularG(NumericalError):
    pass


class OptimizerDidNotConverge(NumericalError):
    """Raised when Nelder-Mead stops without meeting its tolerances.

    Attributes
    ----------
    best : ndarray
        Best iterate found.
    value : float
        Criterion value at ``best``.
    """

    def __init__(self, message, best=None, value=None):
        super().__init__(message)
        self.best = best
        self.value = value


class SeriesNotConverged(NumericalError):
    pass


class NonPsdSpectrum(NumericalError):
    pass


class AllReplicationsFailed(NumericalError):
    pass
