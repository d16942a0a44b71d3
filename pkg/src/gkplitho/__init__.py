"""Homodyne-conditioned GKP codeword generation in an atom-cavity system."""

__version__ = "0.1.0"
