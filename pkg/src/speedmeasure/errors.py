"""Exception types shared across the package."""


class SpeedMeasureError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(SpeedMeasureError, ValueError):
    """Invalid parameters: non-positive tolerances, unknown oracle names, bad grids."""


class DomainError(SpeedMeasureError, ValueError):
    """A time or interval lies outside the domain of a curve."""


class NotBVError(SpeedMeasureError):
    """The curve is not (locally) of bounded variation on the requested interval."""


class InconsistencyError(SpeedMeasureError):
    """A numerical decomposition produced masses that do not add up."""
