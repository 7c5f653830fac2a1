"""Exception types raised by the simulation stages."""


class EqtCatchError(Exception):
    """Base class for numeric failures (mapped to CLI exit code 3)."""


class InstabilityError(EqtCatchError, ValueError):
    """Squeezing strength reaches the parametric threshold."""


class DivergenceError(EqtCatchError):
    """Moment propagation exceeded the configured bound."""

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class NoBalanceError(EqtCatchError):
    """The outgoing field never crossed zero under constant coupling.

    ``min_abs_dout`` carries the smallest ``|d_out|`` seen so a caller can
    retry with a different initial coupling.
    """

    def __init__(self, message, min_abs_dout):
        super().__init__(message)
        self.min_abs_dout = min_abs_dout
