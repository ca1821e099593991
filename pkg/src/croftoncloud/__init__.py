"""Equidistributed point clouds on surfaces via kinematic line sampling.

Generate area-uniform point clouds on implicit, parametric, and
triangulated surfaces; estimate areas and surface integrals from line
intersection statistics; verify equidistribution; estimate normals.
"""

__version__ = "0.1.0"

from .crofton import CroftonEstimate, estimate_area, estimate_double_integral, estimate_surface_integral
from .geometry import OrientedLine, kinematic_mass, make_line, rotation_from_to, sample_line
from .normals import NeighborIndex, normal_cloud, normal_implicit, tangent_frame
from .rng import (
    BoxDomain,
    Pseudo,
    ScalarSource,
    VanDerCorput,
    VanDerCorputRearranged,
    sample_ball,
    sample_box,
    sample_normal_pair,
    sample_rejection,
    sample_sphere,
    sample_union,
    unit_ball_volume,
)
from .samplers import (
    ImplicitSamplerConfig,
    PointCloud,
    cloud_axis_aligned,
    cloud_implicit,
    cloud_parametric,
    cloud_triangulated,
    find_interval,
    intersect_line_implicit,
)
from .stats import (
    RegionTest,
    curse_benchmark,
    density_variation,
    ktuple_test,
    region_test,
    star_discrepancy_1d,
)
from .surfaces import (
    CATALOG,
    ImplicitSurface,
    ParametricSurface,
    TriangulatedSurface,
    barycentric_point,
    triangle_area,
    triangulate_parametric,
    validate,
)

__all__ = [
    "__version__",
    "BoxDomain",
    "CATALOG",
    "CroftonEstimate",
    "ImplicitSamplerConfig",
    "ImplicitSurface",
    "NeighborIndex",
    "OrientedLine",
    "ParametricSurface",
    "PointCloud",
    "Pseudo",
    "RegionTest",
    "ScalarSource",
    "TriangulatedSurface",
    "VanDerCorput",
    "VanDerCorputRearranged",
    "barycentric_point",
    "cloud_axis_aligned",
    "cloud_implicit",
    "cloud_parametric",
    "cloud_triangulated",
    "curse_benchmark",
    "density_variation",
    "estimate_area",
    "estimate_double_integral",
    "estimate_surface_integral",
    "find_interval",
    "intersect_line_implicit",
    "kinematic_mass",
    "ktuple_test",
    "make_line",
    "normal_cloud",
    "normal_implicit",
    "region_test",
    "rotation_from_to",
    "sample_ball",
    "sample_box",
    "sample_line",
    "sample_normal_pair",
    "sample_rejection",
    "sample_sphere",
    "sample_union",
    "star_discrepancy_1d",
    "tangent_frame",
    "triangle_area",
    "triangulate_parametric",
    "unit_ball_volume",
    "validate",
]
