"""Exception types raised across the package."""


class AWQVError(Exception):
    pass


class InputError(AWQVError, ValueError):
    """Malformed or inconsistent arguments (length mismatch, bad edge list, ...)."""


class CapacityError(AWQVError, ValueError):
    """Requested problem is larger than the dense simulator limit."""


class NumericError(AWQVError, ArithmeticError):
    """Non-finite values or norm collapse during a numerical step."""


class FormatError(AWQVError, ValueError):
    """A results or graph file does not have the expected layout."""
