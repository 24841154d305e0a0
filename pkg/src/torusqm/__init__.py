"""Quantum mechanics on a discrete phase-space torus."""

__version__ = "0.1.0"
