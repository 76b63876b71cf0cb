"""Refinement type checking by NNF Horn constraints and scoped elimination."""

__version__ = "0.1.0"
