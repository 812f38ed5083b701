"""Exception hierarchy shared across the toolkit."""


class ArrayCalError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(ArrayCalError, ValueError):
    """Invalid argument values, shapes or domain-type invariant violations."""


class DegenerateGeometryError(ValidationError):
    """Transmitter and antenna positions closer than the minimum distance."""

    def __init__(self, message, pairs=None):
        super().__init__(message)
        self.pairs = pairs or []


class DegenerateInputError(ArrayCalError):
    """Numerically degenerate input (zero rows, undefined phases, ...)."""


class FormatError(ArrayCalError, ValueError):
    """Malformed file content.  `offset` is the byte offset where parsing failed."""

    def __init__(self, message, offset=None):
        super().__init__(message)
        self.offset = offset


class TruncationError(FormatError):
    """File ended before the declared payload was complete."""

    def __init__(self, message, expected_bytes=None, actual_bytes=None):
        super().__init__(message, offset=actual_bytes)
        self.expected_bytes = expected_bytes
        self.actual_bytes = actual_bytes


class DigestMismatchError(ArrayCalError):
    """A calibration record does not belong to the bundle it is applied to."""
