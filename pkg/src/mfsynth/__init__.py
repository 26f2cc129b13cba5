"""Synthesis and desk-scale verification of prescribed multifractal spectra."""

__version__ = "0.1.0"
