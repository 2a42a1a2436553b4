"""Ergoline - convergence-rate certificates for reflected Markov processes."""

__version__ = "0.1.0"
