"""Lagrangian tori in R^4: sampled constructions, area/Maslov lattices,
linking certificates and index audits of holomorphic buildings."""

__version__ = "0.1.0"
