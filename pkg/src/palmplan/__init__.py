"""Dual-palm tabletop manipulation: mechanics, tactile control, planning, simulation."""

__version__ = "0.1.0"
