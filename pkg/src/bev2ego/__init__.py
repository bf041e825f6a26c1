"""BEV scene composition, EGO projection, and detector error mining."""

__version__ = "0.1.0"
