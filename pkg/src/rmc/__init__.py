"""Rigid meromorphic cocycles for orthogonal groups: p-adic Borcherds products,
special values and algebraic recognition."""

__version__ = "0.1.0"
