import math

import numpy as np
import pytest

from croftoncloud import surfaces
from croftoncloud.rng import BoxDomain
from croftoncloud.surfaces import (
    ImplicitSurface,
    ParametricSurface,
    TriangulatedSurface,
    barycentric_point,
    corner_pyramid_implicit,
    corner_pyramid_mesh,
    plane_patch_chart,
    sphere_chart,
    sphere_implicit,
    tetrahedron_mesh,
    torus_implicit,
    triangle_area,
    triangle_normal,
    triangulate_parametric,
    validate,
)


class TestTriangleArea:
    def test_unit_right_triangle(self):
        assert triangle_area([(0, 0, 0), (1, 0, 0), (0, 1, 0)]) == 0.5

    def test_collinear_is_degenerate(self):
        assert triangle_area([(0, 0, 0), (1, 1, 1), (2, 2, 2)]) == 0.0

    def test_skew_triangle(self):
        # cross of (1,0,0) and (0,1,1) has norm sqrt(2)
        assert triangle_area([(0, 0, 0), (1, 0, 0), (1, 1, 1)]) == pytest.approx(
            0.5 * math.sqrt(2.0), rel=1e-15
        )

    def test_vertex_rotation_exact(self):
        tri = np.array([(0.3, 0.1, 0.0), (1.2, -0.4, 0.5), (0.0, 1.0, 2.0)])
        rotated = tri[[1, 2, 0]]
        assert triangle_area(tri) == triangle_area(rotated)

    def test_rigid_motion_invariance(self):
        tri = np.array([(0.3, 0.1, 0.0), (1.2, -0.4, 0.5), (0.0, 1.0, 2.0)])
        theta = 0.7
        rot = np.array(
            [
                [math.cos(theta), -math.sin(theta), 0.0],
                [math.sin(theta), math.cos(theta), 0.0],
                [0.0, 0.0, 1.0],
            ]
        )
        moved = tri @ rot.T + np.array([5.0, -2.0, 3.0])
        assert triangle_area(moved) == pytest.approx(triangle_area(tri), rel=1e-12)

    def test_batched(self):
        tris = np.array(
            [
                [(0, 0, 0), (1, 0, 0), (0, 1, 0)],
                [(0, 0, 0), (2, 0, 0), (0, 2, 0)],
            ],
            dtype=float,
        )
        assert triangle_area(tris).tolist() == [0.5, 2.0]


class TestBarycentric:
    TRI = np.array([(1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0)])

    def test_vertices(self):
        assert barycentric_point(self.TRI, 1.0, 0.0).tolist() == [1.0, 0.0, 0.0]
        assert barycentric_point(self.TRI, 0.0, 0.0).tolist() == [0.0, 0.0, 1.0]

    def test_centroid(self):
        assert np.allclose(barycentric_point(self.TRI, 1 / 3, 1 / 3), [1 / 3, 1 / 3, 1 / 3])

    def test_outside_simplex_rejected(self):
        with pytest.raises(ValueError):
            barycentric_point(self.TRI, 0.7, 0.7)
        with pytest.raises(ValueError):
            barycentric_point(self.TRI, -0.1, 0.5)


class TestTriangulateParametric:
    def test_minimal_grid_count(self):
        mesh, params = triangulate_parametric(plane_patch_chart(u_res=2, v_res=2))
        assert len(mesh) == 2
        assert params.shape == (2, 3, 2)

    @pytest.mark.parametrize("res", [2, 5, 17])
    def test_planar_area_exact(self, res):
        mesh, _ = triangulate_parametric(plane_patch_chart(side=1.0, u_res=res, v_res=res))
        assert len(mesh) == 2 * (res - 1) ** 2
        assert mesh.total_area == pytest.approx(1.0, abs=1e-12)

    def test_sphere_area_converges_from_below(self):
        mesh, _ = triangulate_parametric(sphere_chart(u_res=512, v_res=512))
        area = mesh.total_area
        assert area < 4.0 * math.pi
        assert abs(area - 4.0 * math.pi) / (4.0 * math.pi) < 1e-3

    def test_vertices_lie_on_chart_exactly(self):
        surface = sphere_chart(u_res=7, v_res=9)
        mesh, params = triangulate_parametric(surface)
        images = surface.chart(params[..., 0], params[..., 1])
        assert np.array_equal(mesh.triangles, images)

    def test_cumulative_invariants(self):
        mesh, _ = triangulate_parametric(sphere_chart(u_res=16, v_res=16))
        cum = mesh.cumulative_areas
        assert (np.diff(cum) >= 0.0).all()
        assert cum[-1] == pytest.approx(mesh.areas.sum(), rel=1e-12)

    def test_nonfinite_chart_reports_grid_point(self):
        def bad_chart(u, v):
            with np.errstate(divide="ignore"):
                out = np.stack([u, v, 1.0 / (u - 0.5)], axis=-1)
            return out

        surface = ParametricSurface(bad_chart, BoxDomain((0.0, 0.0), (1.0, 1.0)), 3, 3)
        with pytest.raises(ValueError, match="grid point"):
            triangulate_parametric(surface)


class TestValidate:
    def test_tetrahedron_is_closed(self):
        report = validate(tetrahedron_mesh())
        assert report.ok, report.warnings

    def test_single_triangle_reports_boundary(self):
        report = validate(TriangulatedSurface([[(0, 0, 0), (1, 0, 0), (0, 1, 0)]]))
        assert any("3 boundary edges" in w for w in report.warnings)

    def test_pyramid_mesh_closed(self):
        assert validate(corner_pyramid_mesh()).ok

    def test_cone_apex_flagged(self):
        def cone(x):
            return x[..., 0] ** 2 + x[..., 1] ** 2 - x[..., 2] ** 2

        report = validate(ImplicitSurface(cone, 1.5))
        assert any("vanishing gradient" in w for w in report.warnings)

    def test_sphere_implicit_clean(self):
        assert validate(sphere_implicit()).ok

    def test_parametric_rank_deficiency_flagged(self):
        def collapsed(u, v):
            return np.stack([u, u, np.zeros_like(u)], axis=-1)

        surface = ParametricSurface(collapsed, BoxDomain((0.0, 0.0), (1.0, 1.0)), 4, 4)
        report = validate(surface)
        assert any("rank-deficient" in w for w in report.warnings)

    def test_parametric_sphere_clean_away_from_poles(self):
        # poles are rank deficient for the latitude chart; shrink the band
        def chart(u, v):
            return np.stack([np.cos(u) * np.cos(v), np.cos(u) * np.sin(v), np.sin(u) * np.ones_like(v)], axis=-1)

        surface = ParametricSurface(chart, BoxDomain((-1.2, 0.0), (1.2, 6.0)), 8, 8)
        assert validate(surface).ok


class TestCatalog:
    def test_sphere_field_and_gradient(self):
        s = sphere_implicit()
        pts = np.array([[1.0, 0.0, 0.0], [0.0, 2.0, 0.0]])
        assert s.field(pts).tolist() == [0.0, 3.0]
        assert s.gradient_at(pts).tolist() == [[2.0, 0.0, 0.0], [0.0, 4.0, 0.0]]

    def test_finite_difference_gradient_close(self):
        s = ImplicitSurface(lambda x: (x**2).sum(axis=-1) - 1.0, 2.0)
        grad = s.gradient_at(np.array([[0.6, 0.0, 0.8]]))
        assert np.allclose(grad, [[1.2, 0.0, 1.6]], atol=1e-9)

    def test_torus_surface_points(self):
        t = torus_implicit(2.0, 0.5)
        on = np.array([[2.5, 0.0, 0.0], [0.0, 1.5, 0.0], [2.0, 0.0, 0.5]])
        assert np.allclose(t.field(on), 0.0, atol=1e-14)
        grad = t.gradient(on)
        assert np.allclose(grad[0], [1.0, 0.0, 0.0])

    def test_pyramid_field_signs(self):
        p = corner_pyramid_implicit()
        inside = np.array([[0.2, 0.2, 0.2]])
        outside = np.array([[1.0, 1.0, 1.0], [-0.1, 0.2, 0.2]])
        assert p.field(inside)[0] < 0.0
        assert (p.field(outside) > 0.0).all()

    def test_pyramid_mesh_areas(self):
        mesh = corner_pyramid_mesh()
        areas = sorted(mesh.areas)
        assert areas[:3] == pytest.approx([0.5, 0.5, 0.5])
        assert areas[3] == pytest.approx(math.sqrt(3.0) / 2.0)

    def test_tetrahedron_area(self):
        assert tetrahedron_mesh().total_area == pytest.approx(8.0 * math.sqrt(3.0), rel=1e-12)

    def test_catalog_entries_build(self):
        for name, entry in surfaces.CATALOG.items():
            if entry.implicit is not None:
                assert entry.implicit(clip=entry.default_clip).clip_radius == entry.default_clip
            if entry.chart is not None:
                entry.chart(u_res=4, v_res=4)
            if entry.mesh is not None:
                assert len(entry.mesh()) > 0

    def test_degenerate_triangles_kept_with_zero_weight(self):
        mesh = TriangulatedSurface(
            [
                [(0, 0, 0), (1, 0, 0), (0, 1, 0)],
                [(0, 0, 0), (1, 1, 1), (2, 2, 2)],
            ]
        )
        assert len(mesh) == 2
        assert mesh.total_area == pytest.approx(0.5)

    def test_triangle_normal_orientation(self):
        n = triangle_normal(np.array([(0, 0, 0), (1, 0, 0), (0, 1, 0)], dtype=float))
        assert n.tolist() == [0.0, 0.0, 1.0]
        flipped = triangle_normal(np.array([(0, 0, 0), (0, 1, 0), (1, 0, 0)], dtype=float))
        assert flipped.tolist() == [0.0, 0.0, -1.0]
