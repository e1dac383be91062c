"""Exception hierarchy shared by all modules."""


class NullifierError(Exception):
    """Base class for every error raised by ngnull."""


class InvalidDimensionError(NullifierError, ValueError):
    pass


class InvalidTransmissivityError(NullifierError, ValueError):
    pass


class InvalidParameterError(NullifierError, ValueError):
    pass


class InvalidVarianceError(NullifierError, ValueError):
    pass


class HeraldImpossibleError(NullifierError):
    """The herald outcome has (numerically) zero probability."""


class NonHermitianExpectationError(NullifierError):
    pass


class NonHermitianOperatorError(NullifierError, ValueError):
    pass


class DegenerateAnglesError(NullifierError, ValueError):
    """Angle set does not determine the quadrature decomposition."""


class GridTooSmallError(NullifierError):
    """A numerical integration grid misses probability mass."""


class IncreaseCutoffError(NullifierError):
    """The Fock truncation leaks more population than allowed."""


class OptimizerFailedError(NullifierError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class UnphysicalSpecError(NullifierError, ValueError):
    pass


class InsufficientDataError(NullifierError, ValueError):
    pass


class MissingAngleError(NullifierError, KeyError):
    def __init__(self, theta):
        super().__init__(theta)
        self.theta = theta

    def __str__(self):
        return f"missing phase group for theta={self.theta!r} rad"


class DatasetParseError(NullifierError, ValueError):
    pass
