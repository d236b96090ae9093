"""Chromatic correlation clustering: LP relaxations, rounding and gap analysis."""

from chromacc.instances import GAMMA, CccInstance, Clustering, cost

__version__ = "0.1.0"

__all__ = ["GAMMA", "CccInstance", "Clustering", "cost", "__version__"]
