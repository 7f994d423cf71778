"""Witt vectors, p-typical decompositions and K-groups of truncated polynomial rings."""

__version__ = "0.1.0"
