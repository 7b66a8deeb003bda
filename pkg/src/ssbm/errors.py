"""Exception types raised across the package."""


class SsbmError(Exception):
    """Base class for every error raised by ssbm."""


class DomainError(SsbmError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class NonexistenceError(SsbmError, ArithmeticError):
    """The requested quantity does not exist (e.g. an infinite moment)."""


class ConvergenceError(SsbmError, RuntimeError):
    """An iterative or root-finding procedure failed to converge."""


class DegenerateError(SsbmError, ValueError):
    """Input has no spread (constant sample, zero variance, ...)."""


class InsufficientDataError(SsbmError, ValueError):
    """Too few points or observations for the requested estimate."""


class InputError(SsbmError, ValueError):
    """Malformed user input: missing column, empty series, bad file."""
