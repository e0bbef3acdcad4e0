import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from topsimp import (CellComplex, cap_boundary, dual, from_pixel_grid,
                     from_triangle_mesh, validate_surface)
from topsimp import cell_complex as cc
from topsimp.errors import (DegenerateTriangle, NonManifoldEdge,
                            NotClosedSurface, SizeOverflow)

from instances import (nonmanifold_fixture, sphere_mesh, tetrahedron,
                       torus_mesh)


def assert_symmetric(cx):
    for t in range(cx.n):
        for s in cx.facets(t):
            assert t in cx.cofacets(s)
    for s in range(cx.n):
        for t in cx.cofacets(s):
            assert s in cx.facets(t)


# ---------------------------------------------------------------- meshes
def test_tetrahedron_counts():
    cx = tetrahedron()
    assert cx.n == 14
    assert list(cx.counts) == [4, 6, 4]
    assert cx.boundary_components == 0
    assert cx.is_closed
    assert cx.euler_characteristic() == 2
    assert_symmetric(cx)


def test_single_triangle():
    cx = from_triangle_mesh(3, [(0, 1, 2)])
    assert cx.n == 7
    assert cx.boundary_components == 1
    assert not cx.is_closed
    # the triangle lists its three edges
    assert sorted(cx.facets(6).tolist()) == [3, 4, 5]


def test_edge_shared_by_three_triangles():
    with pytest.raises(NonManifoldEdge):
        from_triangle_mesh(5, [(0, 1, 2), (0, 1, 3), (0, 1, 4)])


def test_degenerate_triangle():
    with pytest.raises(DegenerateTriangle):
        from_triangle_mesh(3, [(0, 1, 1)])


def test_vertex_index_out_of_range():
    with pytest.raises(ValueError):
        from_triangle_mesh(3, [(0, 1, 3)])


def test_torus_euler_characteristic():
    cx = torus_mesh(4, 5)
    assert cx.is_closed
    assert cx.euler_characteristic() == 0


@settings(max_examples=25, deadline=None)
@given(st.integers(4, 60), st.integers(0, 2**32 - 1))
def test_random_sphere_is_closed_manifold(nv, seed):
    cx = sphere_mesh(nv, np.random.default_rng(seed))
    rep = validate_surface(cx)
    assert rep.is_manifold and rep.is_closed
    assert cx.euler_characteristic() == 2


# ---------------------------------------------------------------- grids
@pytest.mark.parametrize("rows, cols, n", [(1, 1, 9), (2, 2, 25), (3, 5, 15 + 38 + 24)])
def test_pixel_grid_counts(rows, cols, n):
    cx = from_pixel_grid(rows, cols)
    assert cx.n == n
    assert cx.counts[2] == rows * cols
    assert cx.boundary_components == 1
    assert cx.euler_characteristic() == 1
    assert_symmetric(cx)


def test_pixel_grid_large_build():
    cx = from_pixel_grid(1025, 1025)
    assert cx.n == 4_206_601


def test_pixel_grid_rejects_empty():
    with pytest.raises(ValueError):
        from_pixel_grid(0, 3)


def test_pixel_grid_size_overflow(monkeypatch):
    monkeypatch.setattr(cc, "_INDEX_LIMIT", 100)
    with pytest.raises(SizeOverflow):
        from_pixel_grid(10, 10)


def test_pixel_cells_are_the_faces():
    cx = from_pixel_grid(3, 4)
    pix = cc.pixel_cells(cx, (3, 4))
    assert pix.shape == (3, 4)
    assert np.all(cx.dims[pix] == 2)
    # pixel (1, 2) shares its right edge with pixel (1, 3)
    shared = set(cx.facets(pix[1, 2])) & set(cx.facets(pix[1, 3]))
    assert len(shared) == 1


# ---------------------------------------------------------------- capping
def test_cap_single_triangle():
    cx = from_triangle_mesh(3, [(0, 1, 2)])
    f = np.arange(7, dtype=float)
    capped, g = cap_boundary(cx, f)
    assert capped.n == 8
    assert capped.virtual.tolist() == [False] * 7 + [True]
    assert len(capped.facets(7)) == 3
    assert g[7] == np.inf
    assert capped.is_closed


def test_cap_is_identity_on_closed():
    cx = tetrahedron()
    f = np.zeros(cx.n)
    capped, g = cap_boundary(cx, f)
    assert capped is cx
    assert np.array_equal(g, f)


def test_cap_two_by_one_grid():
    cx = from_pixel_grid(1, 2)
    capped, _ = cap_boundary(cx)
    assert capped.n == cx.n + 1
    assert len(capped.facets(cx.n)) == 6


def test_cap_annulus_gets_two_caps():
    # 3x3 grid without its centre pixel
    tris = []
    W = 4
    for i in range(3):
        for j in range(3):
            if (i, j) == (1, 1):
                continue
            a, b = i * W + j, i * W + j + 1
            c, d = a + W, b + W
            tris += [(a, b, d), (a, d, c)]
    cx = from_triangle_mesh(16, tris)
    assert cx.boundary_components == 2
    capped, _ = cap_boundary(cx)
    assert capped.virtual.sum() == 2
    assert validate_surface(capped).is_closed


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 6), st.integers(1, 6))
def test_cap_then_validate_closed(r, c):
    capped, _ = cap_boundary(from_pixel_grid(r, c))
    rep = validate_surface(capped)
    assert rep.is_manifold and rep.is_closed
    assert capped.euler_characteristic() == 2
    assert_symmetric(capped)


# ---------------------------------------------------------------- duality
def test_dual_of_tetrahedron():
    d = dual(tetrahedron()).complex
    assert list(d.counts) == [4, 6, 4]


def test_dual_of_capped_square_reverses_counts():
    capped, _ = cap_boundary(from_pixel_grid(1, 1))
    d = dual(capped).complex
    assert list(d.counts) == list(capped.counts)[::-1]


def test_dual_is_an_involution():
    cx = torus_mesh(3, 4)
    d1 = dual(cx)
    d2 = dual(d1.complex)
    composed = d1.to_primal[d2.to_primal]
    assert np.array_equal(composed, np.arange(cx.n))
    for c in range(cx.n):
        assert sorted(composed[d2.complex.facets(c)]) == sorted(cx.facets(composed[c]))


def test_dual_needs_closed_surface():
    with pytest.raises(NotClosedSurface):
        dual(from_pixel_grid(2, 2))


# ---------------------------------------------------------------- validation
def test_fixture_is_not_manifold():
    cx, _ = nonmanifold_fixture()
    rep = validate_surface(cx)
    assert not rep.is_manifold
    assert not rep.is_regular
    assert not rep


def test_tetrahedron_valid():
    rep = validate_surface(tetrahedron())
    assert rep.is_manifold and rep.is_closed and rep.boundary_components == 0


def test_triangle_valid_with_boundary():
    rep = validate_surface(from_triangle_mesh(3, [(0, 1, 2)]))
    assert rep.is_manifold and not rep.is_closed
    assert rep.boundary_components == 1


def test_bowtie_vertex_is_not_manifold():
    cx = from_triangle_mesh(5, [(0, 1, 2), (0, 3, 4)])
    rep = validate_surface(cx)
    assert not rep.is_manifold
    assert any("link of 0-cell 0" in p for p in rep.problems)


def test_dangling_edge_is_not_manifold():
    cx = CellComplex.from_cells([[], [], [], [0, 1], [1, 2], [0, 2], [3, 4, 5],
                                 [], [2, 7]])
    assert not validate_surface(cx).is_manifold


def test_from_cells_infers_dims():
    cx, _ = nonmanifold_fixture()
    assert cx.dims.tolist() == [0, 0, 1, 1, 1, 2, 2]
    assert cx.edge_endpoints()[1].tolist() == [[0, 0], [0, 0], [0, 1]]
