"""Dissipative topology of a dimerized emitter array in a 1D photonic bath."""

__version__ = "0.1.0"
