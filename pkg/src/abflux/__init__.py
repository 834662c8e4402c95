"""Aharonov-Bohm flux toolkit: field geometry, constrained reduction, FD spectra and a flux channel."""

__version__ = "0.1.0"
