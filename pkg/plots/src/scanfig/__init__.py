"""Render Fisher-information scan CSVs into figure-style plots."""

from .render import (
    MissingVariant,
    PlotSpec,
    SchemaMismatch,
    load_scan,
    render_bounds_bar,
    render_fig1,
)

__all__ = ["MissingVariant", "PlotSpec", "SchemaMismatch", "load_scan",
           "render_bounds_bar", "render_fig1"]
__version__ = "0.1.0"
