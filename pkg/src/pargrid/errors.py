"""Exception types shared across the package."""


class GridError(Exception):
    """Base class for all pargrid errors."""


class SizeError(GridError):
    """A build exceeds the 32-bit id space (cells or cell/object pairs)."""


class InvariantError(GridError):
    """A caller violated an operation precondition."""


class ObjParseError(GridError):
    """Malformed OBJ input; carries the offending line number."""

    def __init__(self, message, line_number=None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number
