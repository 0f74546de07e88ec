"""Exception and warning classes shared across the package."""


class HilbertDynError(Exception):
    """Base class for every error raised by hilbertdyn."""


class DimensionMismatch(HilbertDynError, ValueError):
    pass


class DegenerateBodyError(HilbertDynError, ValueError):
    """Empty interior, unbounded region, or an invalid shape matrix."""


class NotInteriorError(HilbertDynError, ValueError):
    pass


class NotOnBoundaryError(HilbertDynError, ValueError):
    pass


class CoincidentPointsError(HilbertDynError, ValueError):
    pass


class InconsistencyError(HilbertDynError, RuntimeError):
    """An internal invariant failed (e.g. a ray of a bounded body never exits)."""


class DomainEscapeError(HilbertDynError, RuntimeError):
    """A map sent a point outside the closed domain."""


class RegimeError(HilbertDynError):
    """The dynamics are in the wrong regime for the requested analysis."""


class BoundedRegimeError(RegimeError):
    pass


class InconclusiveError(RegimeError):
    pass


class MultipleClustersError(RegimeError):
    pass


class ConfigError(HilbertDynError, ValueError):
    pass


class PrecisionWarning(UserWarning):
    """A distance was evaluated so close to the boundary that digits were lost."""
