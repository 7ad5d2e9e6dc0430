"""Desk-scale QAOA and annealing-proxy pipeline for cubic Ising problems on heavy-hex lattices."""

__version__ = "0.1.0"
