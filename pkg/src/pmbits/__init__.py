"""Peres-Mermin contextuality, a hidden-variable signalling protocol, and
Bohmian full-loop Stern-Gerlach trajectories."""

__version__ = "0.1.0"
