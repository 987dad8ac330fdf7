"""Computational laboratory for discrete singular Radon transforms on step-2 nilpotent groups."""

__version__ = "0.1.0"
