"""Exception types shared across the package."""


class BlowupLabError(Exception):
    """Base class for all package-specific errors."""


class NegativeInputError(BlowupLabError):
    """Source term evaluated at a negative state value."""


class SourceOverflowError(BlowupLabError):
    """u**p crossed the double-precision log ceiling; state is past any
    resolvable scale and the run must stop before Inf contaminates it."""


class FamilyMismatchError(BlowupLabError):
    """Initial-data family does not match the requested validator."""


class NoRootError(BlowupLabError):
    """No positive curvature makes the quadratic datum flux-compatible
    for the given (center value, radius, exponent)."""


class NotBlownUpError(BlowupLabError):
    """Operation requires a run that reached the blow-up regime."""


class WindowTooSmallError(BlowupLabError):
    """Fit window has too few samples for a trustworthy estimate."""


class PreconditionFailedError(BlowupLabError):
    """Monitor precondition not met by the run's initial data."""


class ThresholdNeverReachedError(BlowupLabError):
    """Run stopped before the center value crossed the activation level."""


class ConfigError(BlowupLabError):
    """Experiment config file is malformed or out of bounds."""


class ValidationError(BlowupLabError):
    """Initial data failed an admissibility check; nothing was run."""
