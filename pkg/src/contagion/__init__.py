"""Workplace epidemic simulation over timestamped contact logs."""

__version__ = "0.1.0"
