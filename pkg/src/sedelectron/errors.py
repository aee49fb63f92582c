"""Exception and warning types shared across the package."""


class SedError(Exception):
    """Base class for all package errors."""


class ConfigurationError(SedError, ValueError):
    pass


class DomainError(SedError, ValueError):
    pass


class ModelValidityError(SedError, ValueError):
    """Raised when the oscillator parameters leave the narrow-damping regime."""


class CoverageError(SedError, ValueError):
    """Raised when a mode set's frequency cutoffs do not bracket the resonance."""


class SingularityError(SedError, ValueError):
    """Raised when a wavefunction node is hit without a mask."""


class ShapeError(SedError, ValueError):
    pass


class WalkerRangeError(SedError, ValueError):
    pass


class AccuracyWarning(UserWarning):
    pass


class SurfaceTermWarning(UserWarning):
    pass
