"""Exception types shared across the package."""


class DraucError(Exception):
    """Base class for errors raised by this package."""


class ConfigError(DraucError):
    """Invalid model or run configuration."""


class DataFormatError(DraucError):
    """Malformed on-disk data; the message names the offending line."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class CheckpointError(DraucError):
    """Unreadable, tampered, or version-incompatible checkpoint."""
