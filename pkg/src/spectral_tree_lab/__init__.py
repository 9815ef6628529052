"""Random trees, their top adjacency eigenvalues, and walk-counting bounds."""

__version__ = "0.1.0"
