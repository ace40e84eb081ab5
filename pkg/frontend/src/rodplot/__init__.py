"""Figure rendering for the rod benchmark CSV outputs.

Pure file-in/file-out: reads the emitted CSV schemas, renders matplotlib
figures, performs no numerical post-processing beyond axis transforms.
"""

from .render import PLOT_KINDS, PlotSpec, SchemaMismatch, render

__all__ = ["PLOT_KINDS", "PlotSpec", "SchemaMismatch", "render"]

__version__ = "0.1.0"
