"""Exception hierarchy shared by every module."""


class HardnessLabError(Exception):
    """Base class for all errors raised by hardnesslab."""


class DomainError(HardnessLabError, ValueError):
    """An argument lies outside the domain where the quantity is defined."""


class InvalidInputError(HardnessLabError, ValueError):
    """Input data is malformed (non-finite entries, wrong shape, asymmetric)."""


class PreconditionError(HardnessLabError, ValueError):
    """A documented precondition (e.g. a beta-good prior) does not hold."""


class DivergenceError(HardnessLabError, ArithmeticError):
    """The requested quantity is infinite for the given parameters."""


class DegenerateInputError(HardnessLabError, ValueError):
    """Samples are rank deficient, so the construction is undefined."""


class SizeLimitError(HardnessLabError, ValueError):
    """The problem is too large for exhaustive enumeration."""


class MethodError(HardnessLabError, ValueError):
    """The requested evaluation method does not apply to these parameters."""


class FitFailure(HardnessLabError):
    """No grid point satisfied the fitting criterion."""
