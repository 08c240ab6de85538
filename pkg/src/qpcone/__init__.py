"""Qualitative probability orders, discrete cones, and threshold complexes."""

__version__ = "0.1.0"
