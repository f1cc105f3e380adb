"""Exception hierarchy. The CLI maps these to exit codes."""


class PainleveError(Exception):
    """Base class for all package errors."""


class DomainError(PainleveError, ValueError):
    """An input violates a precondition (validation failure)."""


class UnsupportedDimensionError(DomainError):
    """Operation only defined for a specific number of variables."""


class SeparatrixError(PainleveError, ArithmeticError):
    """sin(Phi_1) vanishes: the final Goldstone action diverges."""


class ConnectionDomainError(PainleveError, ArithmeticError):
    """The argument of the logarithm defining I_1 is not positive."""


class CorrectionDomainError(DomainError):
    """x - 2 u_2(x)^2 is not positive inside the evaluation window."""


class NumericalFailure(PainleveError, RuntimeError):
    """Base for failures of an iterative numerical method."""


class IntegrationError(NumericalFailure):
    def __init__(self, message, last_x=None):
        super().__init__(message)
        self.last_x = last_x


class FitError(NumericalFailure):
    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class AmbiguousSignError(FitError):
    """Windowed mean of u_1 is too small to fix sigma."""
