"""Exception hierarchy shared by all modules."""


class ClPathsError(Exception):
    """Base class for every error raised by the package."""


class InvalidDensity(ClPathsError, ValueError):
    pass


class SingularityTooClose(ClPathsError, ValueError):
    pass


class Overflow(ClPathsError, OverflowError):
    """Raised when |rho| leaves the float range; carries log|rho|."""

    def __init__(self, message, log_abs=None):
        super().__init__(message)
        self.log_abs = log_abs


class NoPaths(ClPathsError):
    pass


class NoDecay(ClPathsError):
    """The integrand does not fall below the tail threshold along a tail."""


class QuadratureFail(ClPathsError):
    pass


class NotStabilized(ClPathsError):
    pass


class NumericalFailure(ClPathsError):
    pass


class Runaway(ClPathsError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class SingularHit(ClPathsError):
    pass


class RankDeficientBasis(ClPathsError):
    pass


class CurveTooClose(ClPathsError):
    pass


class ConfigError(ClPathsError, ValueError):
    pass
