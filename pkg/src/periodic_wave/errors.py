"""Exception hierarchy shared by all modules."""


class PeriodicWaveError(Exception):
    """Base class for every error raised by this package."""


class InvalidCoefficient(PeriodicWaveError, ValueError):
    pass


class InvalidSpec(PeriodicWaveError, ValueError):
    pass


class DomainError(PeriodicWaveError, ValueError):
    pass


class InvalidProfile(PeriodicWaveError, ValueError):
    pass


class DegenerateProfile(PeriodicWaveError, ValueError):
    pass


class InvalidBoundary(PeriodicWaveError, ValueError):
    pass


class InadmissibleBoundary(PeriodicWaveError, ValueError):
    """Transformed boundary data has a negative coefficient or a vanishing pair."""


class UncoveredCase(PeriodicWaveError, ValueError):
    """Admissible boundary data outside the five supported combinations."""


class NonPositivePotential(PeriodicWaveError):
    """The essential infimum of the Liouville potential is not positive."""


class ResolutionError(PeriodicWaveError, ValueError):
    pass


class NumericError(PeriodicWaveError, ArithmeticError):
    def __init__(self, message, interval=None):
        super().__init__(message)
        self.interval = interval


class InvalidPeriod(PeriodicWaveError, ValueError):
    pass


class InvalidCase(PeriodicWaveError, ValueError):
    pass


class InconclusiveGap(PeriodicWaveError):
    def __init__(self, message, suggested=None):
        super().__init__(message)
        self.suggested = suggested


class CertificationFailure(PeriodicWaveError):
    pass


class DegenerateNorm(PeriodicWaveError, ValueError):
    pass


class TruncationError(PeriodicWaveError, ValueError):
    pass


class AliasingError(PeriodicWaveError, ValueError):
    pass


class NonConvergence(PeriodicWaveError):
    def __init__(self, message, last=None):
        super().__init__(message)
        self.last = last


class ConfigError(PeriodicWaveError, ValueError):
    pass
