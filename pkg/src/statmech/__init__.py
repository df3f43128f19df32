"""Numerical statistical-mechanics workbench."""

__version__ = "0.1.0"
