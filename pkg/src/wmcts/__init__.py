"""Wasserstein Monte-Carlo tree search."""

__version__ = "0.1.0"
