"""Glued subharmonic solutions of scalar 1-periodic ODEs and their shift dynamics."""

__version__ = "0.1.0"
