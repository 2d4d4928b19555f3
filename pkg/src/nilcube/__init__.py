"""Exact finite cubespaces, nilspaces, translations and cocycles."""

__version__ = "0.1.0"
