import numpy as np
import pytest

from tribem import (
    DegenerateElementError,
    Mesh,
    StlParseError,
    TriangleElement,
    collocation_point,
    generate_bar_mesh,
    is_watertight,
    jacobian,
    map_param_to_point,
    parse_stl,
    signed_volume,
    unit_normal,
    write_stl,
)
from tribem.geometry import edge_use_counts

from oracles import affine_point, random_triangle


def stl_text(facets, name="test"):
    lines = [f"solid {name}"]
    for verts in facets:
        lines.append("  facet normal 0.0 0.0 0.0")
        lines.append("    outer loop")
        for v in verts:
            lines.append(f"      vertex {v[0]:.6e} {v[1]:.6e} {v[2]:.6e}")
        lines.append("    endloop")
        lines.append("  endfacet")
    lines.append(f"endsolid {name}")
    return "\n".join(lines) + "\n"


class TestUnitNormal:
    def test_planar_right_triangle(self):
        n = unit_normal((0, 0, 0), (1, 0, 0), (0, 1, 0))
        assert np.allclose(n, [0, 0, 1], atol=0)

    def test_reversed_winding_flips(self):
        n = unit_normal((0, 0, 0), (0, 1, 0), (1, 0, 0))
        assert np.allclose(n, [0, 0, -1], atol=0)

    def test_collinear_rejected(self):
        with pytest.raises(DegenerateElementError):
            unit_normal((0, 0, 0), (2, 0, 0), (4, 0, 0))

    def test_unit_length(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            a, b, c = random_triangle(rng, scale=3.0)
            assert abs(np.linalg.norm(unit_normal(a, b, c)) - 1.0) <= 1e-12

    def test_flip_negates_exactly(self):
        rng = np.random.default_rng(8)
        for _ in range(100):
            a, b, c = random_triangle(rng)
            n1 = unit_normal(a, b, c)
            n2 = unit_normal(a, c, b)
            assert np.array_equal(n1, -n2)


class TestJacobian:
    def test_unit_right_triangle(self):
        assert jacobian((0, 0, 0), (1, 0, 0), (0, 1, 0)) == pytest.approx(1.0, rel=1e-14)

    def test_equilateral_side_two(self):
        val = jacobian((0, 0, 0), (2, 0, 0), (1, np.sqrt(3), 0))
        assert val == pytest.approx(2 * np.sqrt(3), rel=1e-12)

    def test_collinear_rejected(self):
        with pytest.raises(DegenerateElementError):
            jacobian((0, 0, 0), (1, 0, 0), (2, 0, 0))

    def test_matches_cross_product(self):
        rng = np.random.default_rng(9)
        for _ in range(300):
            a, b, c = random_triangle(rng, scale=5.0)
            heron = jacobian(a, b, c)
            cross = np.linalg.norm(np.cross(b - a, c - a))
            assert heron == pytest.approx(cross, rel=1e-10)

    def test_flip_preserves_value(self):
        rng = np.random.default_rng(10)
        for _ in range(100):
            a, b, c = random_triangle(rng)
            assert jacobian(a, b, c) == pytest.approx(jacobian(a, c, b), rel=1e-14)


class TestParamMapping:
    def test_origin_maps_to_a(self):
        el = TriangleElement.from_vertices((0, 0, 0), (1, 0, 0), (0, 1, 0))
        assert np.allclose(map_param_to_point(el, 0.0, 0.0), el.a, atol=1e-15)

    def test_quarter_half_point(self):
        el = TriangleElement.from_vertices((0, 0, 0), (1, 0, 0), (0, 1, 0))
        assert np.allclose(map_param_to_point(el, 0.25, 0.5), [0.25, 0.5, 0.0], atol=1e-15)

    def test_branch_equivalence_with_affine_oracle(self):
        rng = np.random.default_rng(11)
        for _ in range(1000):
            a, b, c = random_triangle(rng, scale=4.0)
            el = TriangleElement.from_vertices(a, b, c)
            u = rng.uniform(0, 1)
            v = rng.uniform(0, 1 - u)
            got = map_param_to_point(el, u, v)
            want = affine_point(a, b, c, u, v)
            assert np.linalg.norm(got - want) <= 1e-9 * el.diameter


class TestCollocationPoint:
    def test_unit_right_triangle(self):
        el = TriangleElement.from_vertices((0, 0, 0), (1, 0, 0), (0, 1, 0))
        assert np.allclose(collocation_point(el), [0.25, 0.5, 0.0], atol=1e-15)

    def test_scaled(self):
        el = TriangleElement.from_vertices((0, 0, 0), (4, 0, 0), (0, 4, 0))
        assert np.allclose(collocation_point(el), [1.0, 2.0, 0.0], atol=1e-14)

    def test_benchmark_first_element(self):
        # vertices of the canonical bar mesh's first element; the expected
        # point is the affine-map oracle value (barycentric 1/4, 1/4, 1/2)
        a, b, c = (2, 0, 10), (1, 0, 10), (1, 0, 5)
        el = TriangleElement.from_vertices(a, b, c)
        want = affine_point(a, b, c, 0.25, 0.5)
        assert np.allclose(want, [1.25, 0.0, 7.5], atol=1e-15)
        assert np.allclose(collocation_point(el), want, atol=1e-12)

    def test_strictly_interior(self):
        rng = np.random.default_rng(12)
        for _ in range(200):
            a, b, c = random_triangle(rng)
            el = TriangleElement.from_vertices(a, b, c)
            p = collocation_point(el)
            # barycentric coordinates via least squares against the vertices
            M = np.column_stack([b - a, c - a])
            uv, *_ = np.linalg.lstsq(M, p - a, rcond=None)
            u, v = uv
            assert 0.01 < u < 0.99 and 0.01 < v < 0.99 and u + v < 0.99


class TestStlParsing:
    def test_benchmark_style_facet(self):
        text = stl_text([[(2, 0, 10), (1, 0, 10), (1, 0, 5)]])
        mesh = parse_stl(text)
        assert len(mesh) == 1
        el = mesh.elements[0]
        assert np.allclose(el.a, [2, 0, 10], atol=0)
        assert np.allclose(el.b, [1, 0, 10], atol=0)
        assert np.allclose(el.c, [1, 0, 5], atol=0)

    def test_single_planar_facet_normal(self):
        mesh = parse_stl(stl_text([[(0, 0, 0), (1, 0, 0), (0, 1, 0)]]))
        assert np.allclose(mesh.elements[0].normal, [0, 0, 1], atol=0)

    def test_stored_normal_ignored(self):
        text = stl_text([[(0, 0, 0), (1, 0, 0), (0, 1, 0)]]).replace(
            "facet normal 0.0 0.0 0.0", "facet normal 1.0 0.0 0.0"
        )
        mesh = parse_stl(text)
        assert np.allclose(mesh.elements[0].normal, [0, 0, 1], atol=0)

    def test_scientific_notation(self):
        text = stl_text([[(2, 0, 10), (1, 0, 10), (1, 0, 5)]])
        assert "2.000000e+00" in text
        assert len(parse_stl(text)) == 1

    def test_degenerate_facet_named(self):
        text = stl_text(
            [
                [(0, 0, 0), (1, 0, 0), (0, 1, 0)],
                [(0, 0, 0), (0, 0, 0), (0, 1, 0)],
            ]
        )
        with pytest.raises(DegenerateElementError, match="facet 2"):
            parse_stl(text)

    def test_malformed_token_reports_line(self):
        text = stl_text([[(0, 0, 0), (1, 0, 0), (0, 1, 0)]]).replace(
            "vertex 1.000000e+00", "vertex one"
        )
        with pytest.raises(StlParseError, match=r"line \d+"):
            parse_stl(text)

    def test_truncated_facet(self):
        text = "solid t\n facet normal 0 0 0\n  outer loop\n   vertex 0 0 0\n"
        with pytest.raises(StlParseError):
            parse_stl(text)

    def test_binary_rejected(self):
        with pytest.raises(StlParseError, match="binary|NUL"):
            parse_stl("solid x\x00y")

    def test_not_stl(self):
        with pytest.raises(StlParseError, match="solid"):
            parse_stl("OFF\n3 1 0\n")

    def test_roundtrip_through_writer(self):
        mesh = generate_bar_mesh((1, 1), 1, "coarse")
        again = parse_stl(write_stl(mesh))
        assert len(again) == len(mesh)
        assert np.allclose(again.vertices, mesh.vertices, atol=1e-12)

    def test_facet_order_is_element_order(self):
        f1 = [(0, 0, 0), (1, 0, 0), (0, 1, 0)]
        f2 = [(5, 5, 5), (6, 5, 5), (5, 6, 5)]
        mesh = parse_stl(stl_text([f1, f2]))
        assert np.allclose(mesh.elements[0].a, f1[0], atol=0)
        assert np.allclose(mesh.elements[1].a, f2[0], atol=0)


class TestBarGenerator:
    def test_coarse_unit_box_is_12_facets(self):
        mesh = generate_bar_mesh((1, 1), 1, "coarse")
        assert len(mesh) == 12

    def test_facet_counts(self):
        assert len(generate_bar_mesh((4, 4), 100, "medium")) == 176
        assert len(generate_bar_mesh((4, 4), 100, "high")) == 416

    @pytest.mark.parametrize("resolution", ["coarse", "medium", "high"])
    def test_watertight(self, resolution):
        mesh = generate_bar_mesh((4, 4), 100, resolution)
        counts = edge_use_counts(mesh)
        assert all(n == 2 for n in counts.values())
        assert is_watertight(mesh)

    @pytest.mark.parametrize("resolution", ["coarse", "medium", "high"])
    def test_signed_volume(self, resolution):
        mesh = generate_bar_mesh((4, 4), 100, resolution)
        assert signed_volume(mesh) == pytest.approx(1600.0, rel=1e-9)
        assert signed_volume(mesh) > 0  # outward orientation

    def test_end_faces_exist(self):
        mesh = generate_bar_mesh((4, 4), 100, "medium")
        z = mesh.vertices[:, :, 2]
        assert np.any(np.all(np.abs(z) < 1e-12, axis=1))
        assert np.any(np.all(np.abs(z - 100.0) < 1e-12, axis=1))

    def test_rectangular_cross_section(self):
        mesh = generate_bar_mesh((2, 3), 10, "medium")
        assert is_watertight(mesh)
        assert signed_volume(mesh) == pytest.approx(60.0, rel=1e-9)

    def test_bad_dimensions(self):
        with pytest.raises(ValueError):
            generate_bar_mesh((0, 1), 1, "coarse")
        with pytest.raises(ValueError):
            generate_bar_mesh((1, 1), 1, "fine")


class TestMesh:
    def test_requires_elements(self):
        with pytest.raises(StlParseError):
            Mesh([])

    def test_cached_arrays_match_elements(self):
        mesh = generate_bar_mesh((1, 1), 1, "coarse")
        for i, el in enumerate(mesh):
            assert np.array_equal(mesh.normals[i], el.normal)
            assert mesh.jacobians[i] == el.jacobian
            assert np.array_equal(mesh.collocations[i], el.collocation)

    def test_diameter(self):
        mesh = generate_bar_mesh((4, 4), 100, "coarse")
        assert mesh.diameter == pytest.approx(np.sqrt(16 + 16 + 10000), rel=1e-12)
