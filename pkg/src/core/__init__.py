"""Core types for the constraint analyzer: exceptions, kernel, models."""

from .exceptions import (
    AnalysisError,
    InputError,
    ParseError,
    UnknownIdentifier,
)
from . import kernel
from . import models

__all__ = [
    "AnalysisError",
    "InputError",
    "ParseError",
    "UnknownIdentifier",
    "kernel",
    "models",
]
