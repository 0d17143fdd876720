"""Static heatmap rendering of phase-diagram sweep CSVs."""

__version__ = "0.1.0"

from .render import FigureSpec, load_cells, overlay_segments, render_phase_diagram
