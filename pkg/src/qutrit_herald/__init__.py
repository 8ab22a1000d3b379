"""Exact Fock-space simulation of heralded two-qutrit photonic states and CGLMP tests."""

__version__ = "0.1.0"
