"""Exception hierarchy shared by all fracflow modules."""


class FracflowError(Exception):
    """Base class for every error raised by this package."""


class InvalidParams(FracflowError, ValueError):
    pass


class InvalidOrder(FracflowError, ValueError):
    pass


class PoleError(FracflowError, ValueError):
    pass


class NonConvergence(FracflowError, ArithmeticError):
    """A series or quadrature exhausted its budget before meeting the error bound."""


class QuadratureFailure(FracflowError, ArithmeticError):
    pass


class ModeBudgetExceeded(FracflowError, ArithmeticError):
    pass


class StabilityViolation(FracflowError, ArithmeticError):
    """Explicit time marching blew up; dt is too large for (alpha, mu0, dy)."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class ConfigError(FracflowError, ValueError):
    pass
