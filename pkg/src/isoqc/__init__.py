"""Isometric tensor-network quantum circuits on 2D spin lattices."""

__version__ = "0.1.0"
