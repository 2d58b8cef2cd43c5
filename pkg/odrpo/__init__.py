"""Ordinal-decomposition advantage estimation for discrete rewards."""

__version__ = '0.1.0'
