"""Exception types raised by the flamefront modules."""


class FlameFrontError(Exception):
    """Base class for all package errors."""


class GridMismatchError(FlameFrontError, ValueError):
    pass


class BlowUpError(FlameFrontError, RuntimeError):
    """Time integration produced non-finite or runaway samples.

    ``state`` holds the last sampled front before the abort.
    """

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state


class OpenOrbitError(FlameFrontError, ValueError):
    """Phase-plane orbit through (w0, 0) is not closed (w0 >= 1)."""


class NoBranchError(FlameFrontError, ValueError):
    """Requested steady branch does not exist at this epsilon."""


class UnsupportedParameterError(FlameFrontError, ValueError):
    pass


class WindowError(FlameFrontError, ValueError):
    """Pole count outside its existence window eps * (2n - 1) < 1."""


class CollisionError(FlameFrontError, RuntimeError):
    """Two poles on the same line merged during a flow."""


class DivergenceError(FlameFrontError, RuntimeError):
    """A pole escaped to infinity during a flow."""


class ConfigError(FlameFrontError, ValueError):
    pass
