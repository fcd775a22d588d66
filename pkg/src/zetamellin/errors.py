"""Exception hierarchy shared by every module in the package."""


class ZetaMellinError(Exception):
    """Base class for all errors raised by zetamellin."""


class DomainError(ZetaMellinError, ValueError):
    pass


class PoleError(DomainError):
    """Argument sits on a pole of the function being evaluated."""


class GammaOverflowError(ZetaMellinError, OverflowError):
    pass


class AccuracyError(ZetaMellinError, ArithmeticError):
    """Internal cancellation exceeded the accuracy budget."""


class TailBudgetError(ZetaMellinError):
    """The series needs more terms than the configured cap allows."""


class NonConvergenceError(ZetaMellinError):
    """Quadrature did not reach its tolerance.

    ``estimate`` carries the best value reached and ``error`` its error
    estimate, so callers can report what was achieved.
    """

    def __init__(self, message, estimate=None, error=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class TailModelError(NonConvergenceError):
    """The integrand does not follow a convergent log-power decay law."""


class StripError(DomainError):
    pass


class NonAnalyticError(ZetaMellinError):
    """Contour residue depends on the radius: the integrand is not analytic."""


class FitResidualError(ZetaMellinError):
    pass


class OracleNotRunError(ZetaMellinError):
    pass


class UnsupportedError(DomainError):
    pass
