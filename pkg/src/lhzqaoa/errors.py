class ResourceLimitError(RuntimeError):
    """Raised when a request exceeds an enumeration or memory bound."""


class ParseError(ValueError):
    """Malformed text input. ``line`` is 1-based, or None for whole-file errors."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
