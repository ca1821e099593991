"""The three surface representations and their geometry.

* :class:`ImplicitSurface` -- a level set ``field = 0`` clipped to the ball
  of ``clip_radius`` (unbounded level sets have infinite area, so clouds and
  estimates always refer to the clipped piece).
* :class:`ParametricSurface` -- a chart over a rectangle, plus the grid
  resolution used to triangulate it.
* :class:`TriangulatedSurface` -- a plain list of triangles with the lazily
  built cumulative-area table that drives area-weighted sampling.

``validate`` runs the usual health checks (nonvanishing gradient, chart
rank, edge sharing); the report is advisory because none of those conditions
enter the sampling algorithms themselves.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .rng import BoxDomain

__all__ = [
    "ImplicitSurface",
    "ParametricSurface",
    "TriangulatedSurface",
    "triangle_area",
    "triangle_normal",
    "barycentric_point",
    "triangulate_parametric",
    "validate",
    "ValidationReport",
    "CATALOG",
    "CatalogEntry",
    "sphere_implicit",
    "sphere_chart",
    "torus_implicit",
    "torus_chart",
    "ellipsoid_implicit",
    "ellipsoid_chart",
    "plane_implicit",
    "plane_patch_chart",
    "tetrahedron_mesh",
    "corner_pyramid_mesh",
    "corner_pyramid_implicit",
]

# central-difference step, scaled by (1 + |x|) to balance truncation and
# cancellation at double precision
FD_STEP = 1e-5

GRADIENT_FLOOR = 1e-8


@dataclass
class ImplicitSurface:
    """Level set of ``field`` restricted to the ball of radius ``clip_radius``.

    ``field`` must be vectorized: it maps an ``(..., 3)`` array of points to
    an ``(...)`` array of values.  ``gradient``, when supplied, maps
    ``(..., 3)`` to ``(..., 3)``; otherwise gradients fall back to central
    finite differences.
    """

    field: Callable[[np.ndarray], np.ndarray]
    clip_radius: float
    gradient: Optional[Callable[[np.ndarray], np.ndarray]] = None
    name: str = ""

    def __post_init__(self):
        if self.clip_radius <= 0.0:
            raise ValueError(f"clip radius must be positive, got {self.clip_radius}")

    def gradient_at(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=np.float64)
        if self.gradient is not None:
            return np.asarray(self.gradient(pts), dtype=np.float64)
        h = FD_STEP * (1.0 + np.linalg.norm(pts, axis=-1))
        grad = np.empty_like(pts)
        for axis in range(3):
            step = np.zeros_like(pts)
            step[..., axis] = h
            grad[..., axis] = (self.field(pts + step) - self.field(pts - step)) / (2.0 * h)
        return grad


@dataclass
class ParametricSurface:
    """Chart ``(u, v) -> R^3`` over a rectangle, with its grid resolution.

    The chart must accept equal-shape arrays ``u, v`` and return an
    ``(..., 3)`` array.  ``u_res`` and ``v_res`` count grid points per axis
    (so there are ``u_res - 1`` by ``v_res - 1`` cells).
    """

    chart: Callable[[np.ndarray, np.ndarray], np.ndarray]
    domain: BoxDomain
    u_res: int
    v_res: int
    name: str = ""

    def __post_init__(self):
        if self.domain.dim != 2:
            raise ValueError("parameter domain must be two-dimensional")
        if self.u_res < 2 or self.v_res < 2:
            raise ValueError("grid resolutions must be at least 2")


class TriangulatedSurface:
    """Ordered triangle list with cached cumulative areas.

    Degenerate (zero-area) triangles are kept; they occupy zero-width
    intervals of the cumulative table and are never selected.
    """

    def __init__(self, triangles, name: str = ""):
        tris = np.asarray(triangles, dtype=np.float64)
        if tris.ndim != 3 or tris.shape[1:] != (3, 3):
            raise ValueError(f"expected (n, 3, 3) triangle array, got {tris.shape}")
        self.triangles = tris
        self.name = name
        self._cumulative: Optional[np.ndarray] = None

    def __len__(self) -> int:
        return len(self.triangles)

    @property
    def areas(self) -> np.ndarray:
        return triangle_area(self.triangles)

    @property
    def cumulative_areas(self) -> np.ndarray:
        if self._cumulative is None:
            cum = np.cumsum(self.areas)
            if not cum.size or cum[-1] <= 0.0:
                raise ValueError("surface has zero total area")
            self._cumulative = cum
        return self._cumulative

    @property
    def total_area(self) -> float:
        return float(self.cumulative_areas[-1])

    def bounding_radius(self) -> float:
        return float(np.linalg.norm(self.triangles.reshape(-1, 3), axis=1).max())


def triangle_area(tri) -> np.ndarray | float:
    """Half the cross-product magnitude of two edges; batched over (..., 3, 3)."""
    t = np.asarray(tri, dtype=np.float64)
    cross = np.cross(t[..., 1, :] - t[..., 0, :], t[..., 2, :] - t[..., 1, :])
    area = 0.5 * np.linalg.norm(cross, axis=-1)
    return float(area) if t.ndim == 2 else area


def triangle_normal(tri) -> np.ndarray:
    """Unit normal oriented by vertex order; nan for degenerate triangles."""
    t = np.asarray(tri, dtype=np.float64)
    cross = np.cross(t[..., 1, :] - t[..., 0, :], t[..., 2, :] - t[..., 1, :])
    norm = np.linalg.norm(cross, axis=-1, keepdims=True)
    with np.errstate(invalid="ignore"):
        return cross / np.where(norm > 0.0, norm, np.nan)


_SIMPLEX_TOL = 1e-12


def barycentric_point(tri, u: float, v: float) -> np.ndarray:
    """Point of the triangle with barycentric weights (u, v, 1 - u - v)."""
    if u < -_SIMPLEX_TOL or v < -_SIMPLEX_TOL or u + v > 1.0 + _SIMPLEX_TOL:
        raise ValueError(f"({u}, {v}) lies outside the standard 2-simplex")
    t = np.asarray(tri, dtype=np.float64)
    return u * t[0] + v * t[1] + (1.0 - u - v) * t[2]


def _parameter_grid(surface: ParametricSurface):
    (u0, v0), (u1, v1) = surface.domain.lows, surface.domain.highs
    us = np.linspace(u0, u1, surface.u_res)
    vs = np.linspace(v0, v1, surface.v_res)
    return us, vs


def triangulate_parametric(surface: ParametricSurface):
    """Split each grid cell along a diagonal and map the corners by the chart.

    Returns ``(mesh, parameter_triangles)`` where ``parameter_triangles`` has
    shape ``(n, 3, 2)`` and row i holds the (u, v) vertices whose chart
    images are the vertices of mesh triangle i.  Every mesh vertex is the
    chart image of a grid point, so it lies exactly on the surface.
    """
    us, vs = _parameter_grid(surface)
    uu, vv = np.meshgrid(us, vs, indexing="ij")
    grid = np.asarray(surface.chart(uu, vv), dtype=np.float64)
    if grid.shape != (surface.u_res, surface.v_res, 3):
        raise ValueError(f"chart returned shape {grid.shape}, expected {(surface.u_res, surface.v_res, 3)}")
    if not np.isfinite(grid).all():
        i, j = np.argwhere(~np.isfinite(grid).all(axis=-1))[0]
        raise ValueError(f"chart is not finite at grid point (u, v) = ({us[i]}, {vs[j]})")

    iu, jv = np.meshgrid(np.arange(surface.u_res - 1), np.arange(surface.v_res - 1), indexing="ij")
    iu, jv = iu.ravel(), jv.ravel()

    def corner(di, dj):
        return grid[iu + di, jv + dj], np.stack([uu[iu + di, jv + dj], vv[iu + di, jv + dj]], axis=1)

    (g00, p00), (g10, p10), (g11, p11), (g01, p01) = (
        corner(0, 0),
        corner(1, 0),
        corner(1, 1),
        corner(0, 1),
    )
    # cell (i, j) -> upper triangle (g_ij, g_i+1,j+1, g_i,j+1),
    #                lower triangle (g_ij, g_i+1,j, g_i+1,j+1)
    upper = np.stack([g00, g11, g01], axis=1)
    lower = np.stack([g00, g10, g11], axis=1)
    upper_p = np.stack([p00, p11, p01], axis=1)
    lower_p = np.stack([p00, p10, p11], axis=1)
    tris = np.concatenate([upper[:, None], lower[:, None]], axis=1).reshape(-1, 3, 3)
    params = np.concatenate([upper_p[:, None], lower_p[:, None]], axis=1).reshape(-1, 3, 2)
    mesh = TriangulatedSurface(tris, name=surface.name or "parametric")
    return mesh, params


@dataclass
class ValidationReport:
    """Advisory findings; an empty warning list means nothing suspicious."""

    surface: str
    warnings: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.warnings


def _validate_implicit(surface: ImplicitSurface) -> ValidationReport:
    # probe the level set along a fixed bundle of scan lines; defer to the
    # sampler module so the scan logic lives in one place
    from . import samplers
    from .geometry import OrientedLine

    report = ValidationReport(surface.name or "implicit")
    cfg = samplers.ImplicitSamplerConfig()
    r = surface.clip_radius

    # coarse grid sweep catches exact critical points of the level set
    # (cone apices and the like) that transverse line probes step over
    axis = np.linspace(-r, r, 21)
    gx, gy, gz = np.meshgrid(axis, axis, axis, indexing="ij")
    grid = np.stack([gx, gy, gz], axis=-1).reshape(-1, 3)
    grid = grid[np.linalg.norm(grid, axis=1) <= r]
    values = np.abs(np.asarray(surface.field(grid)))
    on_level = grid[values <= 1e-9 * (1.0 + values.max())]
    if len(on_level):
        grads = np.linalg.norm(surface.gradient_at(on_level), axis=1)
        for point, g in zip(on_level[grads < GRADIENT_FLOOR], grads[grads < GRADIENT_FLOOR]):
            report.warnings.append(
                f"vanishing gradient (|grad| = {g:.2e}) at grid point {point.round(6).tolist()}"
            )

    probes = []
    offsets = np.linspace(-0.7 * r, 0.7 * r, 5)
    axes = np.eye(3)
    for axis in range(3):
        for a in offsets:
            for b in offsets:
                foot = a * axes[(axis + 1) % 3] + b * axes[(axis + 2) % 3]
                if np.linalg.norm(foot) >= r:
                    continue
                line = OrientedLine(axes[axis], foot)
                _, pts = samplers.intersect_line_implicit(surface, line, cfg)
                probes.extend(pts)
    if not probes:
        report.warnings.append("no probe line met the level set inside the clip ball")
        return report
    probes = np.asarray(probes)
    grads = np.linalg.norm(surface.gradient_at(probes), axis=1)
    for point, g in zip(probes[grads < GRADIENT_FLOOR], grads[grads < GRADIENT_FLOOR]):
        report.warnings.append(f"vanishing gradient (|grad| = {g:.2e}) near {point.round(6).tolist()}")
    return report


def _validate_triangulated(surface: TriangulatedSurface) -> ValidationReport:
    report = ValidationReport(surface.name or "triangulated")
    edges: dict[tuple, int] = {}
    for tri in surface.triangles:
        for a, b in ((0, 1), (1, 2), (2, 0)):
            key = tuple(sorted((tuple(tri[a]), tuple(tri[b]))))
            edges[key] = edges.get(key, 0) + 1
    boundary = sum(1 for count in edges.values() if count == 1)
    nonmanifold = sum(1 for count in edges.values() if count > 2)
    if boundary:
        report.warnings.append(f"{boundary} boundary edges (shared by exactly one triangle)")
    if nonmanifold:
        report.warnings.append(f"{nonmanifold} edges shared by more than two triangles")
    degenerate = int((surface.areas == 0.0).sum())
    if degenerate:
        report.warnings.append(f"{degenerate} zero-area triangles (kept with zero sampling weight)")
    return report


def _validate_parametric(surface: ParametricSurface) -> ValidationReport:
    report = ValidationReport(surface.name or "parametric")
    us, vs = _parameter_grid(surface)
    uu, vv = np.meshgrid(us, vs, indexing="ij")
    hu = FD_STEP * (us[-1] - us[0])
    hv = FD_STEP * (vs[-1] - vs[0])
    du = (np.asarray(surface.chart(uu + hu, vv)) - np.asarray(surface.chart(uu - hu, vv))) / (2 * hu)
    dv = (np.asarray(surface.chart(uu, vv + hv)) - np.asarray(surface.chart(uu, vv - hv))) / (2 * hv)
    cross = np.linalg.norm(np.cross(du, dv), axis=-1)
    scale = np.linalg.norm(du, axis=-1) * np.linalg.norm(dv, axis=-1) + 1e-300
    bad = np.argwhere(cross / scale < 1e-8)
    for i, j in bad[:20]:
        report.warnings.append(f"rank-deficient differential at grid point (u, v) = ({us[i]:.6g}, {vs[j]:.6g})")
    if len(bad) > 20:
        report.warnings.append(f"... and {len(bad) - 20} more rank-deficient grid points")
    return report


def validate(surface) -> ValidationReport:
    """Advisory health report for any of the three surface kinds."""
    if isinstance(surface, ImplicitSurface):
        return _validate_implicit(surface)
    if isinstance(surface, TriangulatedSurface):
        return _validate_triangulated(surface)
    if isinstance(surface, ParametricSurface):
        return _validate_parametric(surface)
    raise TypeError(f"not a surface: {type(surface).__name__}")


# ---------------------------------------------------------------------------
# built-in catalog


def sphere_implicit(radius: float = 1.0, clip: float = 2.0) -> ImplicitSurface:
    r2 = radius * radius

    def f(x):
        return x[..., 0] ** 2 + x[..., 1] ** 2 + x[..., 2] ** 2 - r2

    return ImplicitSurface(f, clip, gradient=lambda x: 2.0 * x, name="sphere")


def sphere_chart(radius: float = 1.0, u_res: int = 128, v_res: int = 256) -> ParametricSurface:
    """Latitude/longitude chart of the full sphere."""

    def chart(u, v):
        return np.stack(
            [radius * np.cos(u) * np.cos(v), radius * np.cos(u) * np.sin(v), radius * np.sin(u)],
            axis=-1,
        )

    dom = BoxDomain((-np.pi / 2.0, 0.0), (np.pi / 2.0, 2.0 * np.pi))
    return ParametricSurface(chart, dom, u_res, v_res, name="sphere")


def torus_implicit(ring_radius: float = 2.0, tube_radius: float = 0.5, clip: float = 3.0) -> ImplicitSurface:
    def f(x):
        s = np.sqrt(x[..., 0] ** 2 + x[..., 1] ** 2)
        return (s - ring_radius) ** 2 + x[..., 2] ** 2 - tube_radius**2

    def grad(x):
        s = np.sqrt(x[..., 0] ** 2 + x[..., 1] ** 2)
        factor = 2.0 * (s - ring_radius) / np.where(s > 0.0, s, np.inf)
        return np.stack([factor * x[..., 0], factor * x[..., 1], 2.0 * x[..., 2]], axis=-1)

    return ImplicitSurface(f, clip, gradient=grad, name="torus")


def torus_chart(
    ring_radius: float = 2.0, tube_radius: float = 0.5, u_res: int = 128, v_res: int = 256
) -> ParametricSurface:
    """u runs around the tube, v around the ring."""

    def chart(u, v):
        w = ring_radius + tube_radius * np.cos(u)
        return np.stack([w * np.cos(v), w * np.sin(v), tube_radius * np.sin(u) * np.ones_like(v)], axis=-1)

    dom = BoxDomain((0.0, 0.0), (2.0 * np.pi, 2.0 * np.pi))
    return ParametricSurface(chart, dom, u_res, v_res, name="torus")


def ellipsoid_implicit(a: float = 1.5, b: float = 1.0, c: float = 0.5, clip: float = 2.0) -> ImplicitSurface:
    def f(x):
        return (x[..., 0] / a) ** 2 + (x[..., 1] / b) ** 2 + (x[..., 2] / c) ** 2 - 1.0

    def grad(x):
        return np.stack(
            [2.0 * x[..., 0] / a**2, 2.0 * x[..., 1] / b**2, 2.0 * x[..., 2] / c**2], axis=-1
        )

    return ImplicitSurface(f, clip, gradient=grad, name="ellipsoid")


def ellipsoid_chart(
    a: float = 1.5, b: float = 1.0, c: float = 0.5, u_res: int = 128, v_res: int = 128
) -> ParametricSurface:
    def chart(u, v):
        return np.stack([a * np.cos(u) * np.sin(v), b * np.sin(u) * np.sin(v), c * np.cos(v) * np.ones_like(u)], axis=-1)

    dom = BoxDomain((0.0, 0.0), (2.0 * np.pi, np.pi))
    return ParametricSurface(chart, dom, u_res, v_res, name="ellipsoid")


def plane_implicit(clip: float = 2.0) -> ImplicitSurface:
    """The plane z = 0; clipped to the ball it is a disk of area pi * clip^2."""

    def f(x):
        return x[..., 2]

    def grad(x):
        g = np.zeros_like(x)
        g[..., 2] = 1.0
        return g

    return ImplicitSurface(f, clip, gradient=grad, name="plane")


def plane_patch_chart(side: float = 1.0, u_res: int = 2, v_res: int = 2) -> ParametricSurface:
    """Flat square patch of area side^2 centered at the origin in z = 0."""

    def chart(u, v):
        return np.stack([u, v, np.zeros_like(u)], axis=-1)

    h = side / 2.0
    return ParametricSurface(chart, BoxDomain((-h, -h), (h, h)), u_res, v_res, name="plane")


def tetrahedron_mesh() -> TriangulatedSurface:
    """Regular tetrahedron inscribed in the cube [-1, 1]^3; area 8 sqrt(3)."""
    a, b, c, d = (
        np.array([1.0, 1.0, 1.0]),
        np.array([1.0, -1.0, -1.0]),
        np.array([-1.0, 1.0, -1.0]),
        np.array([-1.0, -1.0, 1.0]),
    )
    return TriangulatedSurface([[a, b, c], [a, c, d], [a, d, b], [b, d, c]], name="tetrahedron")


def corner_pyramid_mesh() -> TriangulatedSurface:
    """Faces of the simplex with vertices at the origin and the three axes.

    Three coordinate faces of area 1/2 and one slant face of area sqrt(3)/2;
    the classic fixture for exposing direction-dependent sampling density.
    """
    o = np.zeros(3)
    e1, e2, e3 = np.eye(3)
    return TriangulatedSurface([[o, e1, e2], [o, e2, e3], [o, e3, e1], [e1, e2, e3]], name="pyramid")


def corner_pyramid_implicit(clip: float = 2.0) -> ImplicitSurface:
    """Boundary of {x, y, z >= 0, x + y + z <= 1} as a max-of-planes level set.

    Piecewise smooth; lines through edges form a null set, so scan-based
    intersection works unchanged.
    """

    def f(x):
        return np.maximum.reduce(
            [-x[..., 0], -x[..., 1], -x[..., 2], x[..., 0] + x[..., 1] + x[..., 2] - 1.0]
        )

    return ImplicitSurface(f, clip, name="pyramid")


@dataclass(frozen=True)
class CatalogEntry:
    """Builders for the forms a named surface supports (None if unsupported)."""

    implicit: Optional[Callable[..., ImplicitSurface]]
    chart: Optional[Callable[..., ParametricSurface]]
    mesh: Optional[Callable[[], TriangulatedSurface]]
    area: Optional[float]
    default_clip: float


CATALOG: dict[str, CatalogEntry] = {
    "sphere": CatalogEntry(sphere_implicit, sphere_chart, None, 4.0 * np.pi, 2.0),
    "torus": CatalogEntry(torus_implicit, torus_chart, None, 4.0 * np.pi**2, 3.0),
    "ellipsoid": CatalogEntry(ellipsoid_implicit, ellipsoid_chart, None, None, 2.0),
    "plane": CatalogEntry(plane_implicit, plane_patch_chart, None, None, 2.0),
    "tetrahedron": CatalogEntry(None, None, tetrahedron_mesh, 8.0 * np.sqrt(3.0), 2.0),
    "pyramid": CatalogEntry(
        corner_pyramid_implicit, None, corner_pyramid_mesh, (3.0 + np.sqrt(3.0)) / 2.0, 2.0
    ),
}
