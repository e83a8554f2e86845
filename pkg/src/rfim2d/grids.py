"""Array geometry shared by the samplers and the disagreement analysis.

Two resolutions are used.  The vertex grid holds one cell per lattice vertex
of a region's bounding box (spins, fields, masks).  The doubled grid holds
one cell per extended site: vertex (x,y) at doubled coordinates (2x,2y), the
midpoint of an edge at the sum of its endpoints.  Extended-graph adjacency is
plain 4-connectivity on the doubled grid, so component labelling is a single
scipy.ndimage.label call.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .lattice import Region, build_region

FOUR_CONN = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=np.uint8)


@dataclass(frozen=True)
class RegionGrid:
    """Precomputed masks for one region on the vertex and doubled grids."""

    region: Region
    # vertex grid
    vx0: int
    vy0: int
    vshape: tuple
    vertex_mask: np.ndarray
    interior_mask: np.ndarray
    boundary_mask: np.ndarray
    # doubled grid (padded by one doubled cell for sticking edges)
    dx0: int
    dy0: int
    dshape: tuple
    site_mask: np.ndarray          # vertex + within-edge + sticking cells
    vcell_mask: np.ndarray         # vertex cells
    ecell_mask: np.ndarray         # within-region edge cells
    scell_mask: np.ndarray         # sticking edge cells
    bdry_vcell_mask: np.ndarray    # boundary vertex cells
    inner_vcell_mask: np.ndarray   # annulus only
    outer_vcell_mask: np.ndarray

    def vcells(self, pts):
        pts = np.asarray(pts, dtype=np.int64).reshape(-1, 2)
        return pts[:, 1] - self.vy0, pts[:, 0] - self.vx0

    def dcells(self, pts_doubled):
        pts = np.asarray(pts_doubled, dtype=np.int64).reshape(-1, 2)
        return pts[:, 1] - self.dy0, pts[:, 0] - self.dx0

    def vertex_dcells(self, pts):
        pts = np.asarray(pts, dtype=np.int64).reshape(-1, 2)
        return 2 * pts[:, 1] - self.dy0, 2 * pts[:, 0] - self.dx0


@lru_cache(maxsize=64)
def _region_grid_cached(kind, params, center):
    return _build_region_grid(build_region(kind, params if len(params) > 1 else params[0], center))


def region_grid(region: Region) -> RegionGrid:
    return _region_grid_cached(region.kind, region.params, region.center)


def _build_region_grid(region: Region) -> RegionGrid:
    from .lattice import region_edges, edge_midpoint_doubled

    verts = region.vertices
    vx0, vy0 = int(verts[:, 0].min()), int(verts[:, 1].min())
    vx1, vy1 = int(verts[:, 0].max()), int(verts[:, 1].max())
    vshape = (vy1 - vy0 + 1, vx1 - vx0 + 1)

    def vmask(pts):
        m = np.zeros(vshape, dtype=bool)
        if len(pts):
            m[pts[:, 1] - vy0, pts[:, 0] - vx0] = True
        return m

    vertex_mask = vmask(verts)
    interior_mask = vmask(region.interior)
    boundary_mask = vmask(region.boundary)

    dx0, dy0 = 2 * vx0 - 1, 2 * vy0 - 1
    dshape = (2 * (vy1 - vy0) + 3, 2 * (vx1 - vx0) + 3)

    def dmask(pts_doubled):
        m = np.zeros(dshape, dtype=bool)
        if len(pts_doubled):
            m[pts_doubled[:, 1] - dy0, pts_doubled[:, 0] - dx0] = True
        return m

    edges = region_edges(region)
    within = np.concatenate([edges["int_int"], edges["int_bnd"], edges["bnd_bnd"]], axis=0)
    ecell = dmask(edge_midpoint_doubled(within)) if len(within) else np.zeros(dshape, bool)
    scell = dmask(edge_midpoint_doubled(edges["sticking"]))
    vcell = dmask(2 * verts.astype(np.int64))
    bdry_vcell = dmask(2 * region.boundary.astype(np.int64))
    inner_vcell = (
        dmask(2 * region.inner_boundary.astype(np.int64))
        if region.inner_boundary is not None
        else np.zeros(dshape, bool)
    )
    outer_vcell = (
        dmask(2 * region.outer_boundary.astype(np.int64))
        if region.outer_boundary is not None
        else np.zeros(dshape, bool)
    )

    return RegionGrid(
        region=region,
        vx0=vx0, vy0=vy0, vshape=vshape,
        vertex_mask=vertex_mask,
        interior_mask=interior_mask,
        boundary_mask=boundary_mask,
        dx0=dx0, dy0=dy0, dshape=dshape,
        site_mask=vcell | ecell | scell,
        vcell_mask=vcell,
        ecell_mask=ecell,
        scell_mask=scell,
        bdry_vcell_mask=bdry_vcell,
        inner_vcell_mask=inner_vcell,
        outer_vcell_mask=outer_vcell,
    )


def doubled_infnorm(grid: RegionGrid, center=(0, 0)):
    """max(|xd - 2cx|, |yd - 2cy|) per doubled cell, for radial masks."""
    h, w = grid.dshape
    ys = np.arange(h) + grid.dy0 - 2 * center[1]
    xs = np.arange(w) + grid.dx0 - 2 * center[0]
    return np.maximum(np.abs(ys)[:, None], np.abs(xs)[None, :])


def annulus_extended_mask(grid: RegionGrid, m: int, n: int, center=(0, 0)):
    """Extended sites of Lambda_{m,n}(center): vertices with radius in
    [m+1, n] plus edges with both endpoints there (rho in [2m+2, 2n])."""
    rho = doubled_infnorm(grid, center)
    return (rho >= 2 * m + 2) & (rho <= 2 * n) & grid.site_mask


def ring_vertex_mask(grid: RegionGrid, r: int, center=(0, 0), drop_corners=False):
    rho = doubled_infnorm(grid, center)
    mask = (rho == 2 * r) & grid.vcell_mask
    if drop_corners:
        h, w = grid.dshape
        ys = np.abs(np.arange(h) + grid.dy0 - 2 * center[1])
        xs = np.abs(np.arange(w) + grid.dx0 - 2 * center[0])
        corner = (ys[:, None] == 2 * r) & (xs[None, :] == 2 * r)
        mask = mask & ~corner
    return mask
