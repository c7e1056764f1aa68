"""Exception types raised by crlab."""


class CRLabError(Exception):
    """Base class for all crlab errors."""


class DegenerateInputError(CRLabError, ValueError):
    """An input is too close to zero for the requested quantity to be defined."""


class ZeroProximityError(CRLabError, ValueError):
    """A loop passes within the validity radius of the origin."""


class AliasingError(CRLabError, ValueError):
    """A loop is under-resolved: an angular increment reaches pi."""


class DivergenceError(CRLabError, RuntimeError):
    """An integration or iteration left its admissible region."""


class OutOfWindowError(CRLabError, ValueError):
    """A requested s-position lies outside the stored window."""


class PreconditionError(CRLabError, ValueError):
    """An operation was called with inputs violating its precondition."""


class GridMismatchError(CRLabError, ValueError):
    """Two objects that must share a grid do not."""
