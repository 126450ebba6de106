"""Exact computation of the theta-kernel Kaneko-Zagier solutions and related series."""

from qkz.kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
