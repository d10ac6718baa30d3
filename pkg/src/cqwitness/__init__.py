"""Qubit-probe witness of non-classicality for a system with a single observable."""

__version__ = "0.1.0"
