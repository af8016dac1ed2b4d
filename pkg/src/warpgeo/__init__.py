"""Numerical toolkit for Einstein warped products with 2-dimensional base.

Subpackages split along the pipeline: warpfunc solves the structural ODE,
geometry checks intrinsic curvature on charts, immersions builds explicit
maps into Euclidean space, extrinsic analyzes their second fundamental form,
cli wires everything to subcommands.

The names most callers need are re-exported here; everything else stays in
its module.
"""

from warpgeo.extrinsic import (
    classify_at,
    extrinsic_scan,
    extrinsics_at,
    shape_operator_normal_form,
    umbilical_structure,
)
from warpgeo.geometry import (
    PullbackChart,
    chart_for_family,
    curvature_fd,
    verify_einstein,
)
from warpgeo.immersions import build_immersion
from warpgeo.warpfunc import WarpParams, integrate, schwarzschild_params

__version__ = "0.1.0"

__all__ = [
    "WarpParams",
    "integrate",
    "schwarzschild_params",
    "chart_for_family",
    "curvature_fd",
    "verify_einstein",
    "PullbackChart",
    "build_immersion",
    "extrinsics_at",
    "extrinsic_scan",
    "umbilical_structure",
    "classify_at",
    "shape_operator_normal_form",
    "__version__",
]
