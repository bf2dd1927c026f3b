"""Twisted L2-torsion functions of 3-manifold groups and their degree."""

__version__ = "0.1.0"
