"""Exception hierarchy shared across the package."""


class PrivOptError(Exception):
    """Base class for all errors raised by privopt."""


class SolverFailure(PrivOptError):
    """An optimization routine could not produce a usable answer."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class DimensionTooLarge(PrivOptError, ValueError):
    """A brute-force routine was asked to work on a too-large instance."""


class InfeasibleFloorSystem(PrivOptError):
    """The floor system {x : Ax <= b*} is empty, so no always-feasible release exists."""


class NoPureDpMechanism(PrivOptError):
    """S* is empty: no (eps, 0)-DP mechanism can satisfy the constraints."""


class NotStronglyStable(PrivOptError):
    """The system Ax < 0 has no solution."""


class SingularMatrix(PrivOptError, ValueError):
    pass


class InfeasibleInstance(PrivOptError, ValueError):
    pass


class ParseError(PrivOptError, ValueError):
    """Malformed input file. ``row`` and ``column`` locate the bad cell when known."""

    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column


class DimensionError(PrivOptError, ValueError):
    pass
