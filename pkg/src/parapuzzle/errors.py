"""Exception types shared across the toolkit."""


class ParapuzzleError(Exception):
    """Base class for all domain errors raised by this package."""


class InvalidInput(ParapuzzleError):
    pass


class DegenerateFixedPoint(ParapuzzleError):
    """Raised when 1 - 4c is too close to 0 to separate the fixed points."""


class NoConvergence(ParapuzzleError):
    """A Newton solve ran out of iterations or left the search domain."""


class WrongPeriod(ParapuzzleError):
    """A center solve converged onto a parameter of lower period."""


class LandedOnAlpha(ParapuzzleError):
    """A Misiurewicz solve converged onto the wrong preimage branch
    (the critical orbit hits alpha instead of the co-fixed point)."""


class NotFound(ParapuzzleError):
    pass


class NotInWake(ParapuzzleError):
    """The parameter does not carry the requested ray cycle at alpha."""


class RayLandingFailure(ParapuzzleError):
    """A required external ray failed to land within tolerance."""


class Undecidable(ParapuzzleError):
    """Point location hit an iteration cap before reaching a decision."""


class OrbitEscaped(ParapuzzleError):
    """The critical orbit escaped the truncated puzzle region."""


class ToleranceFailure(ParapuzzleError):
    """A bracket or pullback degenerated; signals boundary grazing."""


class SeparationFailure(ParapuzzleError):
    """Two sections of a winding-number loop came within tolerance of
    each other."""


class UnderResolved(ParapuzzleError):
    """Adjacent winding-number samples jump by a quarter turn or more."""


class EmptyTile(ParapuzzleError):
    """The base parameter's own grid cell could not be classified."""


class WindowClipped(ParapuzzleError):
    """A parameter tile touches the window edge; enlarge the window."""


class CurvesIntersect(ParapuzzleError):
    pass


class TooThin(ParapuzzleError):
    """The annulus is thinner than the grid can resolve reliably."""


class InsufficientLevels(ParapuzzleError):
    pass


class InsufficientData(ParapuzzleError):
    pass


class DomainError(ParapuzzleError):
    """Input interval or parameter lies outside the supported domain."""
