"""Projection averages of linking, crossing and curvature for curves in R^n.

Closed-form kernels for the average over random 3-dimensional projections,
two independent estimators of the mean squared linking number, polygonal
invariants, analytic bounds and a multigraph basis for fitting kernels.
"""

__version__ = "0.1.0"

from .errors import (ArtifactError, DegenerateInput, IllConditioned, InvalidInput, InvalidSpec,
                     NearSingular, NonpositiveEta, ShapeError, TooManyRejections, TouchingCurves,
                     Unsupported)

__all__ = [
    "__version__", "ArtifactError", "DegenerateInput", "IllConditioned", "InvalidInput",
    "InvalidSpec", "NearSingular", "NonpositiveEta", "ShapeError", "TooManyRejections",
    "TouchingCurves", "Unsupported",
]
