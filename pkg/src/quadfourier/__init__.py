"""Desk-scale quadratic Fourier analysis over Z/NZ and [N]."""

__version__ = "0.1.0"
