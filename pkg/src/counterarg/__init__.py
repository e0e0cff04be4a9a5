"""Conclusion-aware counter-argument generation with stance-based candidate ranking."""

__version__ = "0.1.0"
