"""Exception types raised by the simulator."""


class DimensionError(ValueError):
    """Operands have incompatible or unsupported dimensions."""


class NotHermitianError(ValueError):
    """A Hermitian operator was required."""


class InvalidStateError(ValueError):
    """A matrix fails the density-matrix checks (trace, Hermiticity, positivity)."""


class ProtocolViolation(ValueError):
    """An observable other than I or Z was requested on the classical system."""


class ChannelDirectionError(ValueError):
    """A copy channel with the wrong direction was passed to a protocol stage."""


class StageError(ValueError):
    """Protocol states are at the wrong stage for the requested operation."""
