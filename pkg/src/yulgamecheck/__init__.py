"""Bounded game-semantics checker for the EVM dialect of Yul."""

from .engine import (
    ExhaustedWithinBounds,
    GameEngine,
    TimedOut,
    Violation,
    format_trace,
)
from .params import Params

__version__ = "0.1.0"

__all__ = [
    "ExhaustedWithinBounds",
    "GameEngine",
    "Params",
    "TimedOut",
    "Violation",
    "format_trace",
    "__version__",
]
