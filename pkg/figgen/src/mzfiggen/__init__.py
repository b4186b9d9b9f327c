"""Publication-style figures for mzmemory CSV outputs."""

from .figures import (
    GridMismatch,
    MissingColumn,
    read_table,
    render_fig3,
    render_fig4,
    render_fig5,
)

__version__ = "0.1.0"
