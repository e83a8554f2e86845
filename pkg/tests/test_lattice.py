import numpy as np
import pytest

from rfim2d.lattice import (RegionError, build_region, dual_site, extend,
                            rect_edge_list, region_edges, vertical_crossing,
                            dual_horizontal_crossing)


def test_box_counts():
    r = build_region("box", 2)
    assert r.n_vertices == 25
    assert r.n_interior == 9
    assert len(r.boundary) == 16          # perimeter sites of Lambda_2
    inner = build_region("box", 1)
    assert set(map(tuple, r.interior.tolist())) == set(map(tuple, inner.vertices.tolist()))


def test_annulus_counts():
    r = build_region("annulus", (1, 3))
    assert r.n_vertices == 49 - 9
    # generic boundary rule: outer ring plus the hole-adjacent sites
    assert len(r.outer_boundary) == 24
    assert len(r.inner_boundary) == 12
    assert r.n_interior == 4              # the four corners of ring 2


def test_rect_counts():
    r = build_region("rect", (4, 2))
    assert r.n_vertices == 45


def test_bad_params_rejected():
    with pytest.raises(RegionError):
        build_region("annulus", (3, 3))
    with pytest.raises(RegionError):
        build_region("annulus", (4, 2))
    with pytest.raises(RegionError):
        build_region("box", 0)
    with pytest.raises(RegionError):
        build_region("annulus", (1, 2))   # single ring, no interior sites


def test_boundary_is_exactly_outer_adjacent():
    for region in (build_region("box", 3), build_region("annulus", (2, 5)),
                   build_region("rect", (3, 2))):
        inside = set(map(tuple, region.vertices.tolist()))
        for v in region.vertices.tolist():
            has_out = any((v[0] + dx, v[1] + dy) not in inside
                          for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)))
            is_bnd = tuple(v) in set(map(tuple, region.boundary.tolist()))
            assert has_out == is_bnd


def test_interior_neighbors_stay_inside():
    region = build_region("box", 3)
    inside = set(map(tuple, region.vertices.tolist()))
    for v in region.interior.tolist():
        for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            assert (v[0] + dx, v[1] + dy) in inside


def test_row_major_ordering_deterministic():
    a = build_region("box", 2)
    b = build_region("box", 2)
    assert np.array_equal(a.vertices, b.vertices)
    ys = a.vertices[:, 1]
    assert np.all(np.diff(ys) >= 0)


def test_extend_box1_counts():
    g = extend(build_region("box", 1))
    assert len(g.vertex_sites) == 9
    assert len(g.edge_sites) == 12        # all within-region edges of the 3x3 grid
    assert len(g.sticking_sites) == 12    # boundary-incident edges leaving the box
    assert g.incidence_ok()


def test_extend_rect_edge_count():
    r = build_region("rect", (2, 1))
    g = extend(r)
    n_h = 4 * 3   # horizontal nearest-neighbor pairs in [-2,2]x[-1,1]
    n_v = 5 * 2
    assert len(g.edge_sites) == n_h + n_v


def test_dual_edge_and_involution():
    d = dual_site(((0, 0), (1, 0)))
    assert np.allclose(np.sort(d, axis=0), [[0.5, -0.5], [0.5, 0.5]])
    for e in region_edges(build_region("box", 1))["int_int"].tolist():
        back = dual_site(dual_site(e))
        assert np.allclose(np.sort(back, axis=0), np.sort(np.asarray(e, float), axis=0))
    with pytest.raises(RegionError):
        dual_site(((0, 0), (1, 1)))


def test_dual_vertices_fill_unit_squares():
    # each unit square of Lambda_2 contains exactly one dual vertex
    edges = region_edges(build_region("box", 2))
    duals = set()
    for key in ("int_int", "int_bnd", "bnd_bnd"):
        for e in edges[key].tolist():
            for pt in dual_site(e):
                duals.add(tuple(pt))
    squares = {(x + 0.5, y + 0.5) for x in range(-2, 2) for y in range(-2, 2)}
    assert squares <= duals


@pytest.mark.parametrize("rect", [(0, 1, 0, 1), (0, 2, 0, 2)])
def test_planar_duality_exhaustive(rect):
    x0, x1, y0, y1 = rect
    edges = rect_edge_list(x0, x1, y0, y1)
    for mask in range(1 << len(edges)):
        open_set = {e for k, e in enumerate(edges) if (mask >> k) & 1}
        assert vertical_crossing(x0, x1, y0, y1, open_set) != \
            dual_horizontal_crossing(x0, x1, y0, y1, open_set)


def test_planar_duality_sampled():
    rng = np.random.default_rng(0)
    edges = rect_edge_list(-3, 3, -2, 2)
    for _ in range(300):
        open_set = {e for e in edges if rng.random() < rng.random()}
        assert vertical_crossing(-3, 3, -2, 2, open_set) != \
            dual_horizontal_crossing(-3, 3, -2, 2, open_set)
