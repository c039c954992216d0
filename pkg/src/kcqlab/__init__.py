"""Desk-scale laboratory for the alpha-eta (Y-00) quantum-noise stream cipher and its attacks."""

__version__ = "0.1.0"
