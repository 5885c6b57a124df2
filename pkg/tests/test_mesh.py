import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from polyvem.errors import (
    GeometricMismatchError,
    InvalidDomainError,
    InvalidGeometryError,
    InvalidMergeError,
)
from polyvem.mesh import (
    PolygonDomain,
    PolygonalMesh,
    annulus_sector_domain,
    audit_edges,
    combine_meshes,
    generate_polar_quad_mesh,
    generate_polygonal_mesh,
    generate_quad_mesh,
    merge_nonmatching_interface,
    rectangle_domain,
    regular_polygon,
    rotate_region_mesh,
    split_boundary_tag,
)


def edge_lengths(mesh, tag):
    e = mesh.boundary[tag]
    return np.linalg.norm(mesh.nodes[e[:, 1]] - mesh.nodes[e[:, 0]], axis=1).sum()


def test_quad_mesh_counts_and_tags():
    m = generate_quad_mesh((0, 2), (0, 1), 4, 3).validate()
    assert (m.n_nodes, m.n_elements) == (20, 12)
    assert m.total_area() == pytest.approx(2.0, rel=1e-15)
    assert {t: len(e) for t, e in m.boundary.items()} == {"bottom": 4, "right": 3, "top": 4, "left": 3}
    assert audit_edges(m).watertight
    assert np.allclose(m.nodes[m.boundary_nodes("left")][:, 0], 0.0)


def test_polar_mesh_nodes_on_circles():
    m = generate_polar_quad_mesh((1.0, 2.0), (0.0, math.pi / 2), 3, 5).validate()
    r = np.hypot(*m.nodes.T)
    assert np.allclose(r[m.boundary_nodes("inner")], 1.0)
    assert np.allclose(r[m.boundary_nodes("outer")], 2.0)
    assert np.allclose(m.nodes[m.boundary_nodes("theta0")][:, 1], 0.0)
    assert np.allclose(m.nodes[m.boundary_nodes("theta1")][:, 0], 0.0, atol=1e-15)


@pytest.mark.parametrize("bad", [dict(x_range=(1, 1), y_range=(0, 1), nx=1, ny=1),
                                 dict(x_range=(0, 1), y_range=(0, 1), nx=0, ny=1),
                                 dict(x_range=(0, float("nan")), y_range=(0, 1), nx=1, ny=1)])
def test_degenerate_rectangle_rejected(bad):
    with pytest.raises(InvalidDomainError):
        generate_quad_mesh(**bad)


def test_validate_catches_defects():
    nodes = [[0, 0], [1, 0], [1, 1], [0, 1]]
    with pytest.raises(InvalidGeometryError):
        PolygonalMesh(nodes, [[0, 3, 2, 1]], ["a"]).validate()  # clockwise
    with pytest.raises(InvalidGeometryError):
        PolygonalMesh(nodes, [[0, 2, 1, 3]], ["a"]).validate()  # bow tie
    with pytest.raises(InvalidGeometryError):
        PolygonalMesh(nodes, [[0, 1, 4]], ["a"]).validate()
    with pytest.raises(InvalidGeometryError):
        PolygonalMesh(nodes + [[5, 5]], [[0, 1, 2, 3]], ["a"]).validate()  # orphan node


def test_voronoi_mesh_tiles_domain_and_is_deterministic():
    dom = rectangle_domain((0, 3), (0, 1))
    m = generate_polygonal_mesh(dom, 60, seed=4).validate()
    assert m.n_elements == 60
    assert m.total_area() == pytest.approx(3.0, rel=1e-12)
    audit = audit_edges(m)
    assert audit.watertight
    for tag, L in (("bottom", 3.0), ("right", 1.0), ("top", 3.0), ("left", 1.0)):
        assert edge_lengths(m, tag) == pytest.approx(L, rel=1e-12)
    again = generate_polygonal_mesh(dom, 60, seed=4)
    assert again.content_hash() == m.content_hash()
    assert generate_polygonal_mesh(dom, 60, seed=5).content_hash() != m.content_hash()


def test_voronoi_mesh_with_hole_and_nonconvex_outer():
    hole = regular_polygon((0.5, 0.5), 0.2, 16)
    dom = PolygonDomain([[0, 0], [1, 0], [1, 1], [0, 1]], holes=[hole], hole_tags=["via"])
    m = generate_polygonal_mesh(dom, 80, seed=1).validate()
    hole_area = 0.5 * 16 * 0.2 ** 2 * math.sin(2 * math.pi / 16)
    assert m.total_area() == pytest.approx(1.0 - hole_area, rel=1e-10)
    assert edge_lengths(m, "via") == pytest.approx(16 * 2 * 0.2 * math.sin(math.pi / 16), rel=1e-10)
    assert audit_edges(m).watertight

    L = PolygonDomain([[0, 0], [2, 0], [2, 1], [1, 1], [1, 2], [0, 2]])
    mL = generate_polygonal_mesh(L, 50, seed=2).validate()
    assert mL.total_area() == pytest.approx(3.0, rel=1e-10)
    assert audit_edges(mL).watertight


def test_annulus_sector_tags():
    dom = annulus_sector_domain(1.0, 2.0, 0.0, math.pi / 2, 12)
    m = generate_polygonal_mesh(dom, 40, seed=0).validate()
    assert set(m.boundary) == {"inner", "outer", "theta0", "theta1"}
    # inner chord vertices sit on the unit circle
    r_in = np.hypot(*m.nodes[m.boundary_nodes("inner")].T)
    assert r_in.max() == pytest.approx(1.0, abs=1e-12) and r_in.min() > 0.99
    assert edge_lengths(m, "theta0") == pytest.approx(1.0, rel=1e-12)


def test_domain_validation():
    with pytest.raises(InvalidDomainError):
        PolygonDomain([[0, 0], [1, 1], [1, 0], [0, 1]])
    with pytest.raises(InvalidDomainError):
        PolygonDomain([[0, 0], [1, 0], [0, 1]], outer_tags=["a"])
    with pytest.raises(InvalidDomainError):
        generate_polygonal_mesh(rectangle_domain((0, 1), (0, 1)), 0)


def _two_blocks(ny_left, ny_right, shift=0.0):
    a = generate_quad_mesh((0, 1), (0, 1), 2, ny_left, "left_block")
    b = generate_quad_mesh((1 + shift, 2), (0, 1), 2, ny_right, "right_block")
    return a, b


def test_merge_nonmatching_interface():
    a, b = _two_blocks(3, 5)
    m = merge_nonmatching_interface(a, b, "right", "left").validate()
    # 3 + 5 interface segments share 2 end nodes and no interior ones
    assert m.n_nodes == a.n_nodes + b.n_nodes - 2
    assert m.n_elements == a.n_elements + b.n_elements
    assert m.total_area() == pytest.approx(2.0)
    audit = audit_edges(m)
    assert audit.watertight
    assert "right" in m.boundary and "left" in m.boundary
    assert np.allclose(m.nodes[m.boundary_nodes("left")][:, 0], 0.0)
    # every interface edge now has an element on both sides
    x1 = np.isclose(m.nodes[:, 0], 1.0)
    assert x1.sum() == 3 + 5 + 2 - 2


def test_merge_matching_interface_fuses_nodes():
    a, b = _two_blocks(4, 4)
    m = merge_nonmatching_interface(a, b, "right", "left")
    assert m.n_nodes == a.n_nodes + b.n_nodes - 5
    assert all(len(v) == 4 for v in m.elements)


def test_merge_errors():
    a, b = _two_blocks(3, 5, shift=1e-3)
    with pytest.raises(GeometricMismatchError):
        merge_nonmatching_interface(a, b, "right", "left")
    a, b = _two_blocks(3, 5)
    with pytest.raises(InvalidMergeError):
        merge_nonmatching_interface(a, b, "nope", "left")


def test_split_boundary_tag():
    m = generate_quad_mesh((0, 1), (0, 1), 4, 4)
    s = split_boundary_tag(m, "top", lambda mid: mid[:, 0] < 0.5, "top_left")
    assert len(s.boundary["top"]) == 2 and len(s.boundary["top_left"]) == 2
    s.validate()
    with pytest.raises(KeyError):
        split_boundary_tag(m, "missing", lambda mid: mid[:, 0] > 0, "x")


def test_rotate_region_mesh_keeps_area_and_watertightness():
    host_dom = PolygonDomain([[0, 0], [1, 0], [1, 1], [0, 1]],
                             holes=[regular_polygon((0.5, 0.5), 0.25, 12)], hole_tags=["hole"])
    host = generate_polygonal_mesh(host_dom, 60, seed=0, region_tag="host")
    inc_dom = PolygonDomain(regular_polygon((0.5, 0.5), 0.25, 12), outer_tags=["rim"] * 12)
    inc = generate_polygonal_mesh(inc_dom, 15, seed=0, region_tag="inc")
    assembly = combine_meshes(inc, host)
    for angle in (0.0, math.pi / 6, math.pi / 3):
        m = rotate_region_mesh(assembly, "inc", angle, (0.5, 0.5), ("rim", "hole")).validate()
        assert m.n_elements == 75
        assert m.total_area() == pytest.approx(1.0, rel=1e-10)
        assert audit_edges(m).watertight
        assert set(m.boundary) == {"boundary"}
    # a rotation that does not map the 12-gon onto itself leaves a gap
    with pytest.raises(GeometricMismatchError):
        rotate_region_mesh(assembly, "inc", 0.3, (0.5, 0.5), ("rim", "hole"))


def test_content_hash_sensitivity():
    m = generate_quad_mesh((0, 1), (0, 1), 2, 2)
    assert m.content_hash() == generate_quad_mesh((0, 1), (0, 1), 2, 2).content_hash()
    assert m.retag_regions({"domain": "x"}).content_hash() != m.content_hash()
    assert m.rename_boundary({"top": "lid"}).content_hash() != m.content_hash()


@settings(max_examples=15, deadline=None)
@given(n=st.integers(2, 120), seed=st.integers(0, 10 ** 6), w=st.floats(0.1, 10.0))
def test_voronoi_property(n, seed, w):
    m = generate_polygonal_mesh(rectangle_domain((0, w), (0, 1)), n, lloyd_iterations=2, seed=seed)
    m.validate()
    assert m.total_area() == pytest.approx(w, rel=1e-9)
    assert audit_edges(m).watertight
