import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helmuc.mesh import (
    Region,
    box,
    box_minus_disk,
    build_uniform_mesh,
    classify_elements,
    disk,
    face_normals,
    interior_face_normal,
    locate,
    rect_minus_box,
)

UNIT = (0.0, 1.0, 0.0, 1.0)


def test_smallest_mesh(two_triangles):
    m = two_triangles
    assert (m.n_vertices, m.n_triangles, m.n_faces) == (4, 2, 1)


def test_two_by_two_counts(unit2):
    assert (unit2.n_vertices, unit2.n_triangles, unit2.n_faces) == (9, 8, 8)
    assert unit2.n_edges == 16
    assert unit2.n_boundary_edges == 8


def test_reported_h_is_inverse_sqrt_of_nodes(unit2):
    assert unit2.h == pytest.approx(1 / 3, abs=1e-15)


def test_alternating_diagonals(unit2):
    # cell (0,0) cut SW-NE joins vertices 0 and 4; cell (1,0) cut NW-SE joins 2 and 4
    edges = {tuple(int(v) for v in sorted(f[:2])) for f in unit2.interior_faces}
    assert (0, 4) in edges
    assert (2, 4) in edges
    assert (1, 5) not in edges


@pytest.mark.parametrize("nx,ny", [(0, 2), (2, 0), (-1, 1), (1.5, 2)])
def test_bad_counts(nx, ny):
    with pytest.raises(ValueError):
        build_uniform_mesh(UNIT, nx, ny)


@pytest.mark.parametrize("domain", [(1, 1, 0, 1), (0, 1, 2, 1)])
def test_degenerate_domain(domain):
    with pytest.raises(ValueError):
        build_uniform_mesh(domain, 2, 2)


def _check_invariants(m):
    assert np.all(m.signed_areas() > 0)
    # every edge: interior ones twice, boundary ones once
    loc = np.array([[1, 2], [2, 0], [0, 1]])
    keys = np.sort(m.triangles[:, loc].reshape(-1, 2), axis=1)
    _, counts = np.unique(keys, axis=0, return_counts=True)
    assert set(counts) <= {1, 2}
    assert np.sum(counts == 2) == m.n_faces
    assert np.sum(counts == 1) == m.n_boundary_edges
    assert m.n_vertices - m.n_edges + m.n_triangles == 1
    x0, x1, y0, y1 = m.domain
    assert m.signed_areas().sum() == pytest.approx((x1 - x0) * (y1 - y0), rel=1e-12)
    for a, b, left, right in m.interior_faces:
        assert left != right
        assert {a, b} <= set(m.triangles[left]) and {a, b} <= set(m.triangles[right])
    assert m.h == pytest.approx(1 / np.sqrt(m.n_vertices))


@settings(max_examples=25, deadline=None)
@given(
    nx=st.integers(1, 9),
    ny=st.integers(1, 9),
    x0=st.floats(-2, 2),
    y0=st.floats(-2, 2),
    w=st.floats(0.1, 4),
    hgt=st.floats(0.1, 4),
)
def test_mesh_invariants(nx, ny, x0, y0, w, hgt):
    _check_invariants(build_uniform_mesh((x0, x0 + w, y0, y0 + hgt), nx, ny))


def test_boundary_flags(unit2):
    assert unit2.boundary_vertex.sum() == 8
    assert list(unit2.interior_dofs) == [4]


def test_deterministic():
    a = build_uniform_mesh(UNIT, 5, 3)
    b = build_uniform_mesh(UNIT, 5, 3)
    assert np.array_equal(a.triangles, b.triangles)
    assert np.array_equal(a.interior_faces, b.interior_faces)


def test_face_normals(unit2):
    n = face_normals(unit2)
    v = unit2.vertices
    f = unit2.interior_faces
    t = v[f[:, 1]] - v[f[:, 0]]
    assert np.allclose(np.linalg.norm(n, axis=1), 1.0, atol=1e-15)
    assert np.allclose(np.einsum("fd,fd->f", n, t), 0.0, atol=1e-15)
    # normal points from the left triangle's barycenter towards the right one's
    bc = unit2.barycenters()
    d = bc[f[:, 3]] - bc[f[:, 2]]
    assert np.all(np.einsum("fd,fd->f", n, d) > 0)


def test_face_normal_examples(two_triangles, unit2):
    n = interior_face_normal(two_triangles, 0)
    assert np.allclose(np.abs(n), [1 / np.sqrt(2), 1 / np.sqrt(2)])
    assert n[0] * n[1] < 0  # +-(1, -1)/sqrt(2)
    v = unit2.vertices
    for i, (a, b, *_rest) in enumerate(unit2.interior_faces):
        if v[a, 0] == v[b, 0]:
            assert np.allclose(np.abs(interior_face_normal(unit2, i)), [1, 0])


def test_face_normal_rejects_boundary_index(unit2):
    with pytest.raises(IndexError):
        interior_face_normal(unit2, unit2.n_faces)


def test_classify_examples(unit2):
    assert list(classify_elements(unit2, box(*UNIT))) == list(range(8))
    assert classify_elements(unit2, box(0.2, 0.2, 0.2, 0.2)).size == 0
    bottom = classify_elements(unit2, box(0, 1, 0, 0.5))
    assert len(bottom) == 4
    assert np.all(unit2.barycenters()[bottom][:, 1] < 0.5)


def test_classify_partition():
    m = build_uniform_mesh(UNIT, 8, 8)
    inner = classify_elements(m, disk((0.5, 0.5), 0.3))
    outer = classify_elements(m, box_minus_disk(UNIT, (0.5, 0.5), 0.3))
    assert len(np.intersect1d(inner, outer)) == 0
    assert len(inner) + len(outer) == m.n_triangles


def test_rect_minus_box_membership():
    r = rect_minus_box(UNIT, (0.1, 0.9, 0.25, 1.0))
    assert r.contains([[0.05, 0.5], [0.5, 0.1]]).all()
    assert not r.contains([[0.5, 0.5], [0.1, 0.5], [0.5, 0.25]]).any()


def test_unknown_region_kind():
    with pytest.raises(ValueError):
        Region("triangle").contains([[0, 0]])


def test_locate_reproduces_points():
    m = build_uniform_mesh((0, 2, 0, 1), 6, 3)
    rng = np.random.default_rng(1)
    p = rng.uniform([0, 0], [2, 1], size=(200, 2))
    tri, lam = locate(m, p)
    assert np.all(lam > -1e-12)
    recon = np.einsum("mi,mid->md", lam, m.vertices[m.triangles[tri]])
    assert np.allclose(recon, p, atol=1e-13)


def test_dump_format(tmp_path, unit2):
    path = tmp_path / "mesh.txt"
    unit2.dump(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "9 8 8"
    assert len(lines) == 1 + 9 + 8 + 8
    x, y, flag = lines[1].split()
    assert (float(x), float(y), int(flag)) == (0.0, 0.0, 1)
    assert len(lines[-1].split()) == 4
