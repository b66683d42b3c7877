"""Minimal gaps of {alpha (a_m - a_n)} modulo one for structured sequences."""

__version__ = "0.1.0"
