import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, strategies as st

from steklov_lab import geometry as geo
from steklov_lab.errors import MeshQualityError, MeshValidationError, ParameterError
from steklov_lab.mesh import (GAMMA, S, from_triangles, interpolate, locate, read_mesh, refine,
                              triangulate, validate_mesh, write_mesh)


def _edge_sums(mesh, which):
    b = mesh.boundary(which)
    sel = mesh.edge_tag == which
    return np.bincount(mesh.edge_poly[sel], weights=mesh.edge_mass[sel], minlength=b.n_edges)


def _vertex_offsets(mesh, which):
    b = mesh.boundary(which)
    idx = np.nonzero(mesh.vertex_tag == which)[0]
    a = b.polygon.edge_starts[mesh.vertex_edge[idx]]
    e = b.polygon.edge_ends[mesh.vertex_edge[idx]]
    return geo.distance_to_segments(mesh.vertices[idx], a, e) if len(idx) else np.zeros(0)


# ---- triangulate ------------------------------------------------------

def test_unit_square_mesh():
    mesh = triangulate(geo.make_domain(geo.INTERIOR, geo.square_polygon(0.5)), 0.5)
    assert mesh.n_triangles >= 2
    assert abs(mesh.total_area() - 1.0) <= 1e-12
    assert mesh.euler_characteristic() == 1


def test_annulus_area_matches_shoelace(coarse_annulus):
    dom = coarse_annulus.domain
    exact = dom.s.polygon.area - dom.gamma.polygon.area
    assert abs(coarse_annulus.total_area() - exact) <= 1e-10 * exact
    # and the polygonal defect against the true annulus is small
    assert coarse_annulus.total_area() == pytest.approx(8 * math.pi, rel=5e-3)
    assert coarse_annulus.euler_characteristic() == 0


def test_koch_interior_mesh_conformity(koch_mesh):
    q = validate_mesh(koch_mesh)
    assert q.min_angle >= 20.0
    gamma = koch_mesh.domain.gamma
    covered = np.unique(koch_mesh.edge_poly[koch_mesh.edge_tag == GAMMA])
    assert np.array_equal(covered, np.arange(gamma.n_edges))
    # each polygon edge has length 3^-3 = h, so it is never split
    assert len(koch_mesh.boundary_edges) == gamma.n_edges
    assert koch_mesh.euler_characteristic() == 1
    assert abs(koch_mesh.total_area() - gamma.polygon.area) <= 1e-10 * gamma.polygon.area


def test_boundary_pieces_respect_h(disk_mesh, coarse_annulus):
    for mesh, h in ((disk_mesh, 0.05), (coarse_annulus, 0.2)):
        be = mesh.boundary_edges[mesh.edge_tag == GAMMA]
        lens = np.linalg.norm(mesh.vertices[be[:, 0]] - mesh.vertices[be[:, 1]], axis=1)
        assert lens.max() <= h * (1 + 1e-12)


def test_graded_mesh_is_coarser_far_away():
    gamma = geo.circle_polygon(1.0, 128)
    dom = geo.make_domain(geo.TRUNCATED, gamma, geo.circle_polygon(8.0, 128))
    uniform = triangulate(dom, 0.2)
    graded = triangulate(dom, 0.2, grading=0.2)
    assert graded.n_triangles < uniform.n_triangles / 2
    validate_mesh(graded)
    assert np.array_equal(graded.vertices[:128], uniform.vertices[:128])


def test_truncated_meshes_share_the_gamma_discretization():
    gamma = geo.circle_polygon(1.0, 128)
    a = triangulate(geo.make_domain(geo.TRUNCATED, gamma, geo.circle_polygon(3.0, 64)), 0.1, 0.1)
    b = triangulate(geo.make_domain(geo.TRUNCATED, gamma, geo.square_polygon(5.0)), 0.1, 0.1)
    ga, gb = a.tagged_vertices(GAMMA), b.tagged_vertices(GAMMA)
    assert np.array_equal(a.vertices[ga], b.vertices[gb])


def test_h_larger_than_half_clearance_is_rejected():
    dom = geo.make_domain(geo.TRUNCATED, geo.circle_polygon(1, 64), geo.circle_polygon(1.2, 64))
    with pytest.raises(ParameterError):
        triangulate(dom, 0.15)


def test_non_positive_h_is_rejected():
    with pytest.raises(ParameterError):
        triangulate(geo.make_domain(geo.INTERIOR, geo.square_polygon(1)), 0.0)


def test_quality_error_reports_min_angle():
    dom = geo.make_domain(geo.INTERIOR, geo.square_polygon(1.0))
    with pytest.raises(MeshQualityError) as info:
        triangulate(dom, 0.05, max_rounds=0)
    assert info.value.min_angle is not None and info.value.min_angle > 0


def test_triangulate_is_deterministic():
    dom = geo.make_domain(geo.TRUNCATED, geo.koch_snowflake(1.0, 2), geo.circle_polygon(2, 64))
    a = triangulate(dom, 1 / 9, grading=0.1)
    b = triangulate(dom, 1 / 9, grading=0.1)
    assert np.array_equal(a.vertices, b.vertices)
    assert np.array_equal(a.triangles, b.triangles)


@pytest.mark.parametrize("fixture", ["disk_mesh", "coarse_annulus", "koch_mesh",
                                     "koch_truncated_mesh"])
def test_mesh_invariants(request, fixture):
    mesh = request.getfixturevalue(fixture)
    q = validate_mesh(mesh)
    assert q.min_angle >= 20.0 - 1e-9
    assert np.all(mesh.signed_areas() > 0)
    edges, counts = mesh.edges()
    assert counts.max() <= 2
    assert np.sum(counts == 1) == len(mesh.boundary_edges)
    for which in (GAMMA, S):
        if mesh.boundary(which) is None:
            continue
        assert _vertex_offsets(mesh, which).max() <= 1e-12
        sums = _edge_sums(mesh, which)
        np.testing.assert_allclose(sums, mesh.boundary(which).segment_masses, rtol=1e-12)
    assert not np.any((mesh.vertex_tag == GAMMA) & (mesh.vertex_tag == S))


# ---- refine -----------------------------------------------------------

def test_refine_quadruples_and_preserves_area(coarse_annulus):
    r = refine(coarse_annulus)
    assert r.n_triangles == 4 * coarse_annulus.n_triangles
    assert r.total_area() == pytest.approx(coarse_annulus.total_area(), rel=1e-12)


def test_refine_preserves_min_angle_exactly(koch_mesh):
    q0 = validate_mesh(koch_mesh)
    q1 = validate_mesh(refine(koch_mesh))
    assert q1.min_angle == pytest.approx(q0.min_angle, abs=1e-9)


def test_refine_twice_keeps_mass_partition(koch_truncated_mesh):
    r2 = refine(refine(koch_truncated_mesh))
    validate_mesh(r2)
    for which in (GAMMA, S):
        np.testing.assert_allclose(_edge_sums(r2, which), _edge_sums(koch_truncated_mesh, which),
                                   rtol=1e-12)
        assert _vertex_offsets(r2, which).max() <= 1e-12
    assert r2.euler_characteristic() == 0


# ---- validate_mesh ----------------------------------------------------

def _two_triangle_square():
    return from_triangles([[0, 0], [1, 0], [1, 1], [0, 1]], [[0, 1, 2], [0, 2, 3]])


def test_validate_two_triangle_square():
    q = validate_mesh(_two_triangle_square())
    assert q.min_angle == pytest.approx(45.0)
    assert q.h_max == pytest.approx(math.sqrt(2))
    assert (q.n_vertices, q.n_triangles) == (4, 2)


def test_validate_reports_flipped_triangle():
    m = _two_triangle_square()
    t = m.triangles.copy()
    t[1] = t[1][[0, 2, 1]]
    with pytest.raises(MeshValidationError) as info:
        validate_mesh(replace(m, triangles=t))
    assert any("triangle 1" in v for v in info.value.violations)


def test_validate_reports_mass_partition(coarse_annulus):
    mass = coarse_annulus.edge_mass.copy()
    sel = (coarse_annulus.edge_tag == GAMMA) & (coarse_annulus.edge_poly == 0)
    mass[sel] *= 0.9
    with pytest.raises(MeshValidationError) as info:
        validate_mesh(replace(coarse_annulus, edge_mass=mass))
    assert any("mass partition" in v and "0.9" in v for v in info.value.violations)


def test_validate_lists_every_problem(coarse_annulus):
    mass = coarse_annulus.edge_mass * 0.5
    tag = coarse_annulus.vertex_tag.copy()
    tag[coarse_annulus.boundary_edges[0, 0]] = S if coarse_annulus.edge_tag[0] == GAMMA else GAMMA
    with pytest.raises(MeshValidationError) as info:
        validate_mesh(replace(coarse_annulus, edge_mass=mass, vertex_tag=tag))
    text = " ".join(info.value.violations)
    assert "inconsistent tags" in text and "mass partition" in text


def test_validate_reports_overshared_edge():
    m = from_triangles([[0, 0], [1, 0], [1, 1], [0, 1]], [[0, 1, 2], [0, 2, 3]])
    bad = replace(m, triangles=np.vstack([m.triangles, [[0, 1, 2]]]))
    with pytest.raises(MeshValidationError) as info:
        validate_mesh(bad)
    assert any("shared by 3" in v for v in info.value.violations)


# ---- point location and IO -------------------------------------------

@given(x=st.floats(-0.6, 0.6), y=st.floats(-0.6, 0.6))
def test_interpolation_reproduces_linear_fields(disk_mesh, x, y):
    f = 0.3 + 2.0 * disk_mesh.vertices[:, 0] - 1.5 * disk_mesh.vertices[:, 1]
    val = interpolate(disk_mesh, f, [[x, y]])[0]
    assert val == pytest.approx(0.3 + 2.0 * x - 1.5 * y, abs=1e-12)


def test_locate_inside_hole_is_an_error(coarse_annulus):
    with pytest.raises(ParameterError):
        locate(coarse_annulus, [[0.0, 0.0]])
    t, lam = locate(coarse_annulus, [[2.0, 0.0]])
    assert lam.min() >= -1e-10


def test_mesh_file_round_trip(tmp_path, koch_truncated_mesh):
    p1, p2 = tmp_path / "a.mesh", tmp_path / "b.mesh"
    write_mesh(p1, koch_truncated_mesh)
    back = read_mesh(p1, koch_truncated_mesh.domain)
    write_mesh(p2, back)
    assert p1.read_bytes() == p2.read_bytes()
    assert p1.read_text().startswith(
        f"MESH2 {koch_truncated_mesh.n_vertices} {koch_truncated_mesh.n_triangles} "
        f"{len(koch_truncated_mesh.boundary_edges)}\n")
    assert np.array_equal(back.vertices, koch_truncated_mesh.vertices)
    np.testing.assert_array_equal(back.edge_mass, koch_truncated_mesh.edge_mass[
        np.lexsort((koch_truncated_mesh.boundary_edges[:, 1],
                    koch_truncated_mesh.boundary_edges[:, 0]))])
    validate_mesh(back)


def test_mesh_file_bad_header(tmp_path):
    p = tmp_path / "x.mesh"
    p.write_text("MESH3 1 2\n")
    with pytest.raises(ParameterError):
        read_mesh(p)


def test_rigid_motion_keeps_quality(coarse_annulus):
    moved = coarse_annulus.transformed(scale=1.0, shift=(3.0, -2.0), rotation=0.7)
    q0, q1 = validate_mesh(coarse_annulus), validate_mesh(moved)
    assert q1.min_angle == pytest.approx(q0.min_angle, abs=1e-9)
    assert moved.total_area() == pytest.approx(coarse_annulus.total_area(), rel=1e-12)
