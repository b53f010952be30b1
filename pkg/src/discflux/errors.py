"""Exception types shared across the package."""


class DiscFluxError(Exception):
    """Base class for all package errors."""


class NoSignChange(DiscFluxError):
    """h' does not change sign on the declared bracket."""


class BelowMinimum(DiscFluxError):
    """Requested flux value lies below the flux minimum."""


class BracketExceeded(DiscFluxError):
    """The sought root lies outside the flux bracket."""


class OutOfRange(DiscFluxError):
    """Argument outside the derivative range over the bracket."""


class SignViolation(DiscFluxError):
    """Control curve leaves its declared half line."""


class TimeOrderViolation(DiscFluxError):
    """Control curve switch times are not ordered 0 <= t2 <= t1 <= t."""


class SlopeOutOfRange(DiscFluxError):
    """A curve segment slope exits the derivative range of the flux."""


class UnstableBlowup(DiscFluxError):
    """Finite-volume state left the invariant bound; CFL too large or bad data."""


class UnknownScenario(DiscFluxError):
    """No builtin scenario registered under that name."""


class GridMismatch(DiscFluxError):
    """Fields being compared do not live on compatible grids/times."""


class InvariantViolation(DiscFluxError):
    """A computed object failed one of its structural invariants."""


class ConfigError(DiscFluxError):
    """Invalid run configuration."""
