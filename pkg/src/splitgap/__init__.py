"""Numerical laboratory for ground-state splittings of long-range chains."""

__version__ = "0.1.0"
