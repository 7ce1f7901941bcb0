"""Batch figure rendering for meritlab CSV outputs."""

from .render import FigureSpec, SchemaError, main, render

__version__ = "0.1.0"
