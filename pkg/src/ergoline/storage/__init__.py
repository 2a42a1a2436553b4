"""Result files for experiment runs.

CSV and JSON writers stamp every file with the tool version and config hash;
SVG plots are generated without a plotting library.
"""

from .svg import bound_plot
from .writers import ResultWriter, format_cell, format_float

__all__ = ["ResultWriter", "bound_plot", "format_cell", "format_float"]
