"""Exception hierarchy shared by all modules."""


class ResonanceError(Exception):
    """Base class for errors raised by this package."""


class DegenerateState(ResonanceError):
    """State outside the domain of an element or canonical-variable map."""


class NearSingular(ResonanceError):
    """Delaunay partials blow up (eccentricity or sin(i) below the guard)."""


class BelowSurface(ResonanceError):
    """Cartesian position at or below the Earth's equatorial radius."""


class NoConvergence(ResonanceError):
    """An iterative solver (corrector, Newton, bisection) did not converge."""


class Diverged(ResonanceError):
    """A trajectory escaped the configured domain."""


class ConfigError(ResonanceError):
    """Invalid run configuration."""
