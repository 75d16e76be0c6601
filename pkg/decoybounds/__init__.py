"""Decoy-state QKD bound estimation package."""

__version__ = "1.0.0"
