from .smoothing_exceptions import (
    ERROR_MESSAGES,
    ExitCode,
    SmoothingErrorCode,
    SmoothingException,
)

__all__ = [
    "ERROR_MESSAGES",
    "ExitCode",
    "SmoothingErrorCode",
    "SmoothingException",
]
