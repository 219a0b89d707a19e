"""Entanglement witnesses, Schmidt-number witnesses and common witnesses for pairs of states."""

__version__ = "0.1.0"
