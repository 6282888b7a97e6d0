"""Exact verification toolkit for Wahl and QEq contractions of curve configurations on rational surfaces."""

__version__ = "0.1.0"
