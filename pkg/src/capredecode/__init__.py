"""Local pre-decoding plus exact matching for the periodic rotated surface code."""

__version__ = "0.1.0"
