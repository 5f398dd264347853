"""Figure rendering for sweep-result CSVs."""

from .render import SchemaError, build_series, load_rows, render

__version__ = "0.1.0"

__all__ = ["SchemaError", "build_series", "load_rows", "render"]
