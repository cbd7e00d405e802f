"""Figure renderer for hybridsim sweep CSV files."""

__version__ = "0.1.0"

from .schema import SchemaError, SweepRow, read_sweep_csv  # noqa: F401
from .render import FigureSpec, render  # noqa: F401
