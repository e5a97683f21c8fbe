"""Spectral bounds, radial reductions and Markov-chain estimators on weighted graphs."""

__version__ = "0.1.0"
