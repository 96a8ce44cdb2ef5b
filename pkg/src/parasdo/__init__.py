"""Optimal partition identification and sensitivity analysis for
parametric semidefinite optimization."""
from ._backend import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
