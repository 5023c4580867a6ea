"""Relativistic fields of arbitrary spin and a cutoff four-species decay model."""

__version__ = "0.1.0"
