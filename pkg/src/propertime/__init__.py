"""Proper-time localization numerics for a free spinless relativistic particle."""
__version__ = "0.1.0"
