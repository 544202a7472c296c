"""Exception hierarchy shared by every module in the package."""


class GavcError(Exception):
    """Base class for all package errors."""


class ParameterError(GavcError, ValueError):
    """An argument violates a documented precondition."""


class DegenerateError(ParameterError):
    """Parameters make a formula undefined (zero power, |rho| = 1, ...)."""


class FeasibilityError(GavcError):
    """Requested operating point lies outside the achievable set."""


class ScheduleError(ParameterError):
    """Key-size schedule grows too fast to satisfy the sub-exponential condition."""


class BracketError(GavcError, ArithmeticError):
    """Root finder was given a bracket with no sign change."""
