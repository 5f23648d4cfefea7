"""Frame-based semantic analysis, generation, episodic memory, and script
learning over a controlled English fragment."""

from .agent import Agent
from .kr import Frame, KBError, parse_kb, serialize_kb

__version__ = "0.1.0"

__all__ = ["Agent", "Frame", "KBError", "parse_kb", "serialize_kb", "__version__"]
