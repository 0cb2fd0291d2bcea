from __future__ import annotations


class LindbladError(Exception):
    """Base class for every error raised by the backend and the CLI services."""


class InvalidDimensionError(LindbladError, ValueError):
    pass


class PreconditionError(LindbladError, ValueError):
    pass


class StateDomainError(LindbladError, ValueError):
    pass


class DegenerateChannelError(LindbladError, ValueError):
    pass


class IntegrationError(LindbladError, RuntimeError):
    def __init__(self, message: str, time: float):
        super().__init__(f"{message} (t={float(time):.6g})")
        self.time = float(time)


class ConfigError(LindbladError, ValueError):
    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}" if field else message)
        self.field = str(field)
