"""Exact invariants of degenerating polarized variations of Hodge structure."""

__version__ = "0.1.0"
