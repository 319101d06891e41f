"""Puzzle and parapuzzle computations for the quadratic family z^2 + c."""

__version__ = "0.1.0"
