"""Extremal entrywise norms on the orthogonal group O(N)."""

__version__ = "0.1.0"
