"""Exception types shared across the package.

The CLI maps each class onto a fixed exit code, so callers that want the
same behaviour programmatically can catch by class.
"""


class CarbonModelError(Exception):
    """Base class for every error raised by hpc_carbon."""

    exit_code = 1


class ValidationError(CarbonModelError, ValueError):
    """Malformed or out-of-range input."""

    exit_code = 2

    def __init__(self, message: str, field: str | None = None, line: int | None = None):
        self.field = field
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class MissingDataError(CarbonModelError):
    """An optional figure (or an UNKNOWN registry value) is needed but absent."""

    exit_code = 3


class PreconditionError(CarbonModelError):
    """The analysis cannot run on the inputs given (e.g. too few traces)."""

    exit_code = 4
