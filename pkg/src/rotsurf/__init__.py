"""Differential geometry of rotational surfaces in E^3 and E^4.

Charts are evaluated with second-order Taylor jets, so fundamental forms,
curvatures and coordinate Laplacians come out exact to rounding.  The
``classify`` module decides flatness, minimality, pseudo-umbilicity and
coordinate finite type from residuals over a parameter grid.
"""

__version__ = "0.1.0"

from .classify import ClassificationVerdict, Thresholds, classify_surface, fit_diagonal  # noqa: E402
from .families import PRESETS, make_chart, preset  # noqa: E402
from .geometry import Chart, Grid, analyze_point, sample_grid  # noqa: E402

__all__ = [
    "__version__",
    "Chart",
    "Grid",
    "ClassificationVerdict",
    "PRESETS",
    "Thresholds",
    "analyze_point",
    "classify_surface",
    "fit_diagonal",
    "make_chart",
    "preset",
    "sample_grid",
]
