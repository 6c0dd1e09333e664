"""Figure pipeline for snls run outputs (CSV/manifest consumers only)."""

__version__ = "0.1.0"

from .io import SchemaError, StaleDataError
from .render import KINDS, FigureSpec, render

__all__ = ["FigureSpec", "render", "KINDS", "SchemaError", "StaleDataError", "__version__"]
