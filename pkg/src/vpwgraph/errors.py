"""Exception hierarchy. The CLI maps each family onto an exit code."""


class VpwError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ValidationError(VpwError, ValueError):
    """Bad parameters or inputs, detected before any heavy computation."""

    exit_code = 2


class NumericError(VpwError, ArithmeticError):
    """A numerical routine failed (non-convergence, singular system)."""

    exit_code = 3


class DataFormatError(VpwError, ValueError):
    """Malformed input file content."""

    exit_code = 4
