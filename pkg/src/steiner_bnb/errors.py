"""Exception types raised by the solver."""


class SteinerError(ValueError):
    """Base class for every error the package raises on bad input."""


class DimensionMismatch(SteinerError):
    pass


class DegenerateCherry(SteinerError):
    """Cherry points are (nearly) collinear with the reference point."""


class TooFewPoints(SteinerError):
    pass


class NoSuchEdge(SteinerError):
    pass


class NoMoreRegularPoints(SteinerError):
    pass


class NotAdjacent(SteinerError):
    pass


class NoTriplet(SteinerError):
    pass


class CapExceeded(SteinerError):
    pass


class InstanceError(SteinerError):
    """Malformed instance text."""


class RaggedRow(InstanceError):
    pass


class NonNumeric(InstanceError):
    pass


class AllCoincident(InstanceError):
    pass


class IoError(OSError):
    """An output file could not be written."""
