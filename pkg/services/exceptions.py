"""
Custom exceptions for service layer operations.
"""


class RunNotFoundError(Exception):
    """Raised when a requested run folder does not exist."""

    def __init__(self, run_id: str, message: str = None):
        self.run_id = run_id
        if message is None:
            message = f"Run {run_id} not found"
        super().__init__(message)


class DocumentFormatError(ValueError):
    """Raised when a frame/weights JSON document does not have the expected shape."""

    def __init__(self, location: str, message: str = None):
        self.location = location
        if message is None:
            message = f"Malformed document at {location}"
        super().__init__(message)


class ConfigError(ValueError):
    """Raised when an experiment config cannot be parsed or fails schema validation."""

    def __init__(self, source: str, message: str, line: int = None):
        self.source = source
        self.line = line
        prefix = f"{source}:{line}" if line is not None else source
        super().__init__(f"{prefix}: {message}")
