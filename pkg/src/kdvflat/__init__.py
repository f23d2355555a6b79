"""Flatness-based boundary control of the linear KdV equation on [-1, 0]."""

__version__ = "0.1.0"
