"""Finite sublattices of Z^2 and their extended (vertex + edge-midpoint) graphs.

Regions are boxes Lambda_N = [-N,N]^2, annuli Lambda_N \\ Lambda_M and
rectangles R(a,b) = [-a,a] x [-b,b], optionally translated.  The interior
boundary of a region G is the set of its vertices with a lattice neighbor
outside G; spins live on the interior, boundary conditions on the boundary.

The extended graph places an extra site on the midpoint of every edge that
touches the region.  To keep connectivity queries cheap, extended sites are
embedded in a "doubled" integer grid: vertex (x, y) sits at (2x, 2y) and the
midpoint of {(x1,y1), (x2,y2)} at (x1+x2, y1+y2).  Two extended sites are
adjacent exactly when the embedded points are lattice neighbors, so component
labelling reduces to 4-connectivity on a boolean mask.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

MAX_HALF_SIDE = 2 ** 14

_NBR_STEPS = np.array([(1, 0), (-1, 0), (0, 1), (0, -1)], dtype=np.int32)


def _row_major(coords):
    """Sort (n,2) coordinate array row-major: by y, then x."""
    coords = np.asarray(coords, dtype=np.int32)
    if len(coords) == 0:
        return coords.reshape(0, 2)
    order = np.lexsort((coords[:, 0], coords[:, 1]))
    return coords[order]


class RegionError(ValueError):
    pass


@dataclass(frozen=True)
class Region:
    """A finite sublattice with materialized vertex, interior and boundary sets.

    Immutable after construction; safe to share across workers.  Vertex
    ordering is row-major so that seeded runs are reproducible.
    """

    kind: str
    params: tuple
    center: tuple = (0, 0)
    vertices: np.ndarray = field(repr=False, default=None)
    interior: np.ndarray = field(repr=False, default=None)
    boundary: np.ndarray = field(repr=False, default=None)
    # Annulus only: the boundary split into hole-adjacent and outside-adjacent parts.
    inner_boundary: np.ndarray = field(repr=False, default=None)
    outer_boundary: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        for name in ("vertices", "interior", "boundary", "inner_boundary", "outer_boundary"):
            arr = getattr(self, name)
            if arr is not None:
                arr.setflags(write=False)

    # -- membership ---------------------------------------------------------

    def contains(self, pts) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=np.int64))
        cx, cy = self.center
        x = pts[:, 0] - cx
        y = pts[:, 1] - cy
        r = np.maximum(np.abs(x), np.abs(y))
        if self.kind == "box":
            return r <= self.params[0]
        if self.kind == "annulus":
            m, n = self.params
            return (r <= n) & (r > m)
        a, b = self.params
        return (np.abs(x) <= a) & (np.abs(y) <= b)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_interior(self) -> int:
        return len(self.interior)

    def interior_index(self) -> dict:
        return {(int(x), int(y)): i for i, (x, y) in enumerate(self.interior)}

    def vertex_index(self) -> dict:
        return {(int(x), int(y)): i for i, (x, y) in enumerate(self.vertices)}

    def boundary_index(self) -> dict:
        return {(int(x), int(y)): i for i, (x, y) in enumerate(self.boundary)}


def _box_vertices(n, cx, cy):
    xs = np.arange(-n, n + 1, dtype=np.int32)
    gx, gy = np.meshgrid(xs + cx, xs + cy, indexing="xy")
    return np.column_stack([gx.ravel(), gy.ravel()])


def build_region(kind, params, center=(0, 0)) -> Region:
    """Materialize a box, annulus or rectangle with its boundary split.

    box(N): (2N+1)^2 vertices, interior = box(N-1).
    annulus(M, N): Lambda_N minus Lambda_M; requires M < N - 1 so that the
        hole-adjacent and outside-adjacent boundaries are disjoint and the
        region has interior sites (the four corners of ring M+1 at least).
    rect(a, b): [-a,a] x [-b,b].
    """
    cx, cy = int(center[0]), int(center[1])
    if kind == "box":
        (n,) = (int(params),) if np.isscalar(params) else (int(params[0]),)
        if n < 1:
            raise RegionError(f"box half-side must be >= 1, got {n}")
        if n > MAX_HALF_SIDE:
            raise RegionError(f"box half-side capped at {MAX_HALF_SIDE}, got {n}")
        params_t = (n,)
        verts = _box_vertices(n, cx, cy)
    elif kind == "annulus":
        m, n = int(params[0]), int(params[1])
        if m < 1 or n < 1:
            raise RegionError(f"annulus radii must be >= 1, got {(m, n)}")
        if m >= n:
            raise RegionError(f"annulus requires M < N, got M={m}, N={n}")
        if n == m + 1:
            raise RegionError(
                f"annulus({m},{n}) is a single ring with no interior sites; need N >= M+2"
            )
        if n > MAX_HALF_SIDE:
            raise RegionError(f"annulus outer radius capped at {MAX_HALF_SIDE}, got {n}")
        params_t = (m, n)
        outer = _box_vertices(n, cx, cy)
        r = np.maximum(np.abs(outer[:, 0] - cx), np.abs(outer[:, 1] - cy))
        verts = outer[r > m]
    elif kind == "rect":
        a, b = int(params[0]), int(params[1])
        if a < 1 or b < 1:
            raise RegionError(f"rect half-sides must be >= 1, got {(a, b)}")
        if max(a, b) > MAX_HALF_SIDE:
            raise RegionError(f"rect half-side capped at {MAX_HALF_SIDE}")
        params_t = (a, b)
        xs = np.arange(-a, a + 1, dtype=np.int32) + cx
        ys = np.arange(-b, b + 1, dtype=np.int32) + cy
        gx, gy = np.meshgrid(xs, ys, indexing="xy")
        verts = np.column_stack([gx.ravel(), gy.ravel()])
    else:
        raise RegionError(f"unknown region kind {kind!r}")

    verts = _row_major(verts)
    region = Region(kind=kind, params=params_t, center=(cx, cy), vertices=verts)

    inside = set(map(tuple, verts.tolist()))
    bnd_mask = np.zeros(len(verts), dtype=bool)
    for k, (dx, dy) in enumerate(_NBR_STEPS):
        nb = verts + np.array([dx, dy], dtype=np.int32)
        bnd_mask |= np.array([tuple(p) not in inside for p in nb.tolist()])
    boundary = verts[bnd_mask]
    interior = verts[~bnd_mask]

    inner_b = outer_b = None
    if kind == "annulus":
        m, n = params_t
        r = np.maximum(np.abs(boundary[:, 0] - cx), np.abs(boundary[:, 1] - cy))
        outer_b = boundary[r == n]
        inner_b = boundary[r == m + 1]

    return Region(
        kind=kind,
        params=params_t,
        center=(cx, cy),
        vertices=verts,
        interior=interior,
        boundary=boundary,
        inner_boundary=inner_b,
        outer_boundary=outer_b,
    )


# ---------------------------------------------------------------------------
# Edges


def region_edges(region: Region):
    """Classify the nearest-neighbor edges touching a region.

    Returns a dict of (m, 2, 2) endpoint arrays:
      int_int  both endpoints interior,
      int_bnd  one interior, one boundary (first row interior),
      bnd_bnd  both endpoints on the boundary (within the region),
      sticking one endpoint in the region, the other outside (first row inside).

    The Hamiltonian uses int_int and int_bnd only; the extended graph carries
    edge sites for all four classes.
    """
    inside = set(map(tuple, region.vertices.tolist()))
    interior = set(map(tuple, region.interior.tolist()))
    int_int, int_bnd, bnd_bnd, sticking = [], [], [], []
    for (x, y) in region.vertices.tolist():
        for dx, dy in ((1, 0), (0, 1)):          # rightward/upward: each in-edge once
            q = (x + dx, y + dy)
            p = (x, y)
            if q in inside:
                pi, qi = p in interior, q in interior
                if pi and qi:
                    int_int.append((p, q))
                elif pi:
                    int_bnd.append((p, q))
                elif qi:
                    int_bnd.append((q, p))
                else:
                    bnd_bnd.append((p, q))
        for dx, dy in _NBR_STEPS.tolist():       # sticking edges: all 4 directions
            q = (x + dx, y + dy)
            if q not in inside:
                sticking.append(((x, y), q))

    def arr(lst):
        return np.array(lst, dtype=np.int32).reshape(len(lst), 2, 2)

    return {
        "int_int": arr(int_int),
        "int_bnd": arr(int_bnd),
        "bnd_bnd": arr(bnd_bnd),
        "sticking": arr(sticking),
    }


def edge_midpoint_doubled(edge):
    """Doubled-grid coordinates of an edge midpoint: sum of the endpoints."""
    e = np.asarray(edge)
    return e[..., 0, :] + e[..., 1, :]


# ---------------------------------------------------------------------------
# Extended graph


@dataclass(frozen=True)
class ExtendedGraph:
    """Vertex sites plus edge-midpoint sites of a region, on the doubled grid.

    vertex_sites: (n,2) doubled coordinates, row-major.
    edge_sites:   (m,2) doubled coordinates of within-region edges, row-major.
    sticking_sites: (k,2) doubled midpoints of edges leaving the region.
    boundary_sites: doubled coordinates of the extended boundary (sticking
        edge midpoints plus the region's boundary vertices).
    """

    region: Region
    vertex_sites: np.ndarray = field(repr=False, default=None)
    edge_sites: np.ndarray = field(repr=False, default=None)
    sticking_sites: np.ndarray = field(repr=False, default=None)
    boundary_sites: np.ndarray = field(repr=False, default=None)

    @property
    def n_sites(self):
        return len(self.vertex_sites) + len(self.edge_sites) + len(self.sticking_sites)

    def incidence_ok(self) -> bool:
        """Every within-region edge site touches exactly 2 vertex sites, every
        sticking edge site exactly 1."""
        vset = set(map(tuple, self.vertex_sites.tolist()))
        for s in self.edge_sites.tolist():
            deg = sum(1 for d in _NBR_STEPS.tolist() if (s[0] + d[0], s[1] + d[1]) in vset)
            if deg != 2:
                return False
        for s in self.sticking_sites.tolist():
            deg = sum(1 for d in _NBR_STEPS.tolist() if (s[0] + d[0], s[1] + d[1]) in vset)
            if deg != 1:
                return False
        return True


def extend(region: Region) -> ExtendedGraph:
    """Build the extended graph of a region (stable row-major site indexing)."""
    if region.n_vertices == 0:
        raise RegionError("cannot extend an empty region")
    edges = region_edges(region)
    within = np.concatenate(
        [edges["int_int"], edges["int_bnd"], edges["bnd_bnd"]], axis=0
    )
    edge_sites = _row_major(edge_midpoint_doubled(within)) if len(within) else np.zeros((0, 2), np.int32)
    sticking_sites = _row_major(edge_midpoint_doubled(edges["sticking"]))
    vertex_sites = _row_major(2 * region.vertices.astype(np.int32))
    boundary_sites = _row_major(
        np.concatenate([sticking_sites, 2 * region.boundary.astype(np.int32)], axis=0)
    )
    return ExtendedGraph(
        region=region,
        vertex_sites=vertex_sites,
        edge_sites=edge_sites,
        sticking_sites=sticking_sites,
        boundary_sites=boundary_sites,
    )


# ---------------------------------------------------------------------------
# Dual lattice


def dual_site(edge):
    """The dual edge crossing a primal nearest-neighbor edge.

    The dual lattice is Z^2 + (1/2, 1/2); exactly one dual edge crosses each
    primal edge, and the map is an involution.  Returns a (2,2) float array of
    the dual edge's endpoints.
    """
    e = np.asarray(edge, dtype=np.float64).reshape(2, 2)
    d = e[1] - e[0]
    if not (np.isclose(np.abs(d).sum(), 1.0) and np.isclose(np.abs(d).prod(), 0.0)):
        raise RegionError(f"not a nearest-neighbor edge: {edge}")
    mx, my = (e[0] + e[1]) / 2.0
    if d[1] == 0:   # horizontal edge -> vertical dual edge
        return np.array([(mx, my - 0.5), (mx, my + 0.5)])
    return np.array([(mx - 0.5, my), (mx + 0.5, my)])


# ---------------------------------------------------------------------------
# Bond-configuration crossings and planar duality on a rectangle


def rect_edge_list(x0, x1, y0, y1):
    """All nearest-neighbor edges inside [x0,x1] x [y0,y1], fixed order."""
    out = []
    for y in range(y0, y1 + 1):
        for x in range(x0, x1 + 1):
            if x < x1:
                out.append(((x, y), (x + 1, y)))
            if y < y1:
                out.append(((x, y), (x, y + 1)))
    return out


def vertical_crossing(x0, x1, y0, y1, open_set) -> bool:
    """Open-path crossing from the top row y=y1 to the bottom row y=y0."""
    adj = {}
    for (p, q) in open_set:
        adj.setdefault(p, []).append(q)
        adj.setdefault(q, []).append(p)
    start = [(x, y1) for x in range(x0, x1 + 1)]
    seen = set(start)
    stack = list(start)
    while stack:
        p = stack.pop()
        if p[1] == y0:
            return True
        for q in adj.get(p, ()):
            if q not in seen:
                seen.add(q)
                stack.append(q)
    return bool(y1 == y0)


def dual_horizontal_crossing(x0, x1, y0, y1, open_set) -> bool:
    """Left-right crossing of the dual (face) grid through closed primal edges.

    The separating curve enters face (0,j) by crossing the leftmost-column
    vertical edge at x0, hops between adjacent faces across the shared primal
    edge, and exits face (w-1,j) across the rightmost vertical edge at x1.
    Every crossed primal edge must be closed; such a curve exists iff the
    vertical primal crossing of the rectangle fails.
    """
    w, h = x1 - x0, y1 - y0
    open_set = set(open_set) | {(q, p) for (p, q) in open_set}

    def closed(p, q):
        return (p, q) not in open_set

    if h == 0:
        return False          # no vertical edges; primal crossing is trivial
    if w == 0:
        return any(closed((x0, y), (x0, y + 1)) for y in range(y0, y1))

    stack = [(0, j) for j in range(h) if closed((x0, y0 + j), (x0, y0 + j + 1))]
    seen = set(stack)
    while stack:
        (i, j) = stack.pop()
        if i == w - 1 and closed((x1, y0 + j), (x1, y0 + j + 1)):
            return True
        for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            ni, nj = i + di, j + dj
            if not (0 <= ni < w and 0 <= nj < h) or (ni, nj) in seen:
                continue
            if di != 0:   # shared vertical primal edge between face columns
                e = ((x0 + max(i, ni), y0 + j), (x0 + max(i, ni), y0 + j + 1))
            else:         # shared horizontal primal edge between face rows
                e = ((x0 + i, y0 + max(j, nj)), (x0 + i + 1, y0 + max(j, nj)))
            if closed(*e):
                seen.add((ni, nj))
                stack.append((ni, nj))
    return False
