"""Nikishin systems, multi-level Hermite-Pade polynomials and their strong asymptotics."""
__version__ = "0.1.0"
