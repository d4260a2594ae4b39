"""Exception hierarchy shared by all modules."""


class RDArnoldiError(Exception):
    """Base class for every error raised by this package."""


class NumericalError(RDArnoldiError, ArithmeticError):
    """A numerical kernel failed (singular system, no convergence, overflow)."""


class SingularMatrix(NumericalError):
    pass


class NoConvergence(NumericalError):
    pass


class ExpmOverflow(NumericalError, OverflowError):
    pass


class NotHermitian(RDArnoldiError, ValueError):
    pass


class NotSupported(RDArnoldiError, ValueError):
    pass


class SingularShift(NumericalError):
    """``I - delta*L`` could not be factored: L is not sectorial for this delta."""


class ZeroVector(RDArnoldiError, ValueError):
    pass


class AtFullDimension(RDArnoldiError):
    pass


class SingularHessenberg(NumericalError):
    pass


class ThetaOutOfRange(RDArnoldiError, ValueError):
    pass


class NotSectorial(RDArnoldiError, ValueError):
    pass


class MaxIterations(NumericalError):
    """The stopping rule was not met within ``max_m`` iterations.

    The best available iterate is attached as ``approximation``.
    """

    def __init__(self, message, approximation=None):
        super().__init__(message)
        self.approximation = approximation


class ConfigError(RDArnoldiError, ValueError):
    pass
