"""Exception hierarchy shared across the package."""


class NehariError(Exception):
    """Base class for all package-specific failures."""


class InvalidParameter(NehariError):
    pass


class UnsupportedRegime(NehariError):
    pass


class RegimeMismatch(NehariError):
    pass


class NoNegativeFiber(NehariError):
    pass


class RootBracketFailure(NehariError):
    pass


class InvalidCoefficients(NehariError):
    pass


class NotOnM(NehariError):
    pass


class NotOnM0(NehariError):
    pass


class GridMismatch(NehariError):
    pass


class AssemblyFailure(NehariError):
    pass


class NumericalFailure(NehariError):
    pass


class DegenerateConstraint(NehariError):
    pass


class InitializationFailure(NehariError):
    pass


class ConvergenceFailure(NehariError):
    """Raised when the descent hits the iteration cap. Carries the partial report."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class BranchLossFailure(NehariError):
    """Raised when an iterate can no longer be projected onto the M+ branch."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
