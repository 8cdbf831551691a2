"""Exception hierarchy shared by all levelcurve modules."""


class LevelCurveError(Exception):
    """Base class for all levelcurve errors."""


class InvalidGeometry(LevelCurveError):
    """Shape parameters do not describe a valid convex body."""


class NonConvexBody(LevelCurveError):
    """A support function whose curvature radii are not strictly positive."""


class InvalidProblem(LevelCurveError):
    """Ring problem rejected at construction (nesting, grids, equation)."""


class NonConvexIterate(LevelCurveError):
    """Newton iterate violated the convexity / h_t < 0 guard and the line
    search could not recover."""


class NewtonDiverged(LevelCurveError):
    """Newton hit the iteration cap without reaching the residual tolerance."""

    def __init__(self, message, last_residual=None):
        super().__init__(message)
        self.last_residual = last_residual


class GeometryNotNested(LevelCurveError):
    """Inner circle not strictly inside the outer circle."""


class OutOfRange(LevelCurveError):
    """Parameter outside the documented validity range of a closed form."""


class NoRadialSolution(LevelCurveError):
    """The radial minimal-graph two-point problem has no solution for the
    requested radii (the ring cannot span a unit height)."""


class TooFewSamples(LevelCurveError):
    """A profile check needs at least three samples."""


class ConfigError(LevelCurveError):
    """Malformed or inconsistent run configuration."""
