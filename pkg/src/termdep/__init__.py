"""Selective term-dependence retrieval driven by non-compositionality scoring."""

__version__ = "0.1.0"
