"""Estimation, simulation and sweep services."""
