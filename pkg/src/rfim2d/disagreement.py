"""Pre-disagreement sets, connectivity events, the swap map, the pair order.

All operations act on PairSnapshot objects: two extended configurations on
the doubled grid of one region, sharing the quenched field.  The
pre-disagreement set is D = {extended sites u : sigma_u^+ > sigma_u^-};
connectivity is vertex-edge incidence, i.e. 4-connectivity on the doubled
grid.  Components come from scipy.ndimage.label, so everything here is a pure
function of immutable snapshots and cheap enough to run per measurement.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, replace

import numpy as np
from scipy import ndimage

from .grids import FOUR_CONN, RegionGrid, annulus_extended_mask, region_grid, ring_vertex_mask
from .oracle import EventSpec


@dataclass(frozen=True)
class PairSnapshot:
    """Extended configuration pair on the doubled grid (int8 arrays).

    Cells outside site_mask are zero and meaningless.  Boundary edge sites
    that stick out of the region carry the forced value of their in-region
    endpoint's boundary spin (metadata: boundary_edge_rule = "forced").
    """

    grid: RegionGrid
    plus: np.ndarray
    minus: np.ndarray

    boundary_edge_rule = "forced"

    def __post_init__(self):
        self.plus.setflags(write=False)
        self.minus.setflags(write=False)

    def d_mask(self) -> np.ndarray:
        return (self.plus > self.minus) & self.grid.site_mask

    def anti_mask(self) -> np.ndarray:
        return (self.plus < self.minus) & self.grid.site_mask


@dataclass(frozen=True)
class DisagreementSet:
    """Labelled pre-disagreement components of one snapshot."""

    grid: RegionGrid
    mask: np.ndarray
    labels: np.ndarray
    n_components: int

    def component_of(self, label_id) -> np.ndarray:
        return self.labels == label_id


def pre_disagreements(snapshot: PairSnapshot, anti: bool = False) -> DisagreementSet:
    mask = snapshot.anti_mask() if anti else snapshot.d_mask()
    labels, n = ndimage.label(mask, structure=FOUR_CONN)
    return DisagreementSet(grid=snapshot.grid, mask=mask, labels=labels, n_components=int(n))


def anchored_component(ds: DisagreementSet, anchor_mask: np.ndarray) -> np.ndarray:
    """D_S: union of components of D intersecting the anchor mask."""
    hit = np.unique(ds.labels[anchor_mask & ds.mask])
    hit = hit[hit > 0]
    if len(hit) == 0:
        return np.zeros_like(ds.mask)
    return np.isin(ds.labels, hit)


def boundary_anchored(ds: DisagreementSet) -> np.ndarray:
    """D_boundary: anchored at the region's boundary vertex sites."""
    return anchored_component(ds, ds.grid.bdry_vcell_mask)


# ---------------------------------------------------------------------------
# Event detectors


def _crossing_labels(ds: DisagreementSet, mask_a, mask_b, within=None):
    labels = ds.labels
    if within is not None:
        labels, _ = ndimage.label(ds.mask & within, structure=FOUR_CONN)
    la = np.unique(labels[mask_a & (labels > 0)])
    lb = np.unique(labels[mask_b & (labels > 0)])
    return np.intersect1d(la, lb), labels


def _witness(labels, label_id, mask_a, mask_b):
    """Shortest site path (BFS) within one component from mask_a to mask_b."""
    comp = labels == label_id
    start = comp & mask_a
    goal = comp & mask_b
    h, w = comp.shape
    prev = np.full((h, w, 2), -1, dtype=np.int32)
    seen = np.zeros_like(comp)
    queue = deque()
    for r, c in zip(*np.nonzero(start)):
        queue.append((int(r), int(c)))
        seen[r, c] = True
    while queue:
        r, c = queue.popleft()
        if goal[r, c]:
            path = [(r, c)]
            while prev[path[-1][0], path[-1][1], 0] >= 0:
                pr, pc = prev[path[-1][0], path[-1][1]]
                path.append((int(pr), int(pc)))
            path.reverse()
            return path
        for dr, dc in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            nr, nc = r + dr, c + dc
            if 0 <= nr < h and 0 <= nc < w and comp[nr, nc] and not seen[nr, nc]:
                seen[nr, nc] = True
                prev[nr, nc] = (r, c)
                queue.append((nr, nc))
    return None


def detect_event(snapshot: PairSnapshot, event: EventSpec):
    """Evaluate one pre-disagreement event; returns (bool, witness-or-None).

    Witnesses are doubled-grid (row, col) site lists for crossing events."""
    grid = snapshot.grid
    region = grid.region
    ds = pre_disagreements(snapshot)

    if event.kind == "origin_in_D_boundary":
        v = tuple(int(x) for x in (event.params[0] if event.params else (0, 0)))
        rows, cols = grid.vertex_dcells([v])
        anchored = boundary_anchored(ds)
        ok = bool(anchored[rows[0], cols[0]])
        return ok, None

    if event.kind == "hcross":
        a, b = int(event.params[0]), int(event.params[1])
        cx, cy = region.center
        rho_x = np.abs(np.arange(grid.dshape[1]) + grid.dx0 - 2 * cx)
        rho_y = np.abs(np.arange(grid.dshape[0]) + grid.dy0 - 2 * cy)
        within = (rho_x[None, :] <= 2 * a) & (rho_y[:, None] <= 2 * b) & grid.site_mask
        xs = np.arange(grid.dshape[1]) + grid.dx0 - 2 * cx
        left = (xs[None, :] == -2 * a) & within & grid.vcell_mask
        right = (xs[None, :] == 2 * a) & within & grid.vcell_mask
        hits, labels = _crossing_labels(ds, left, right, within=within)
        if len(hits) == 0:
            return False, None
        return True, _witness(labels, hits[0], left, right)

    if event.kind in ("con", "con2"):
        if region.kind != "annulus":
            raise ValueError("con events need an annulus region")
        inner = grid.inner_vcell_mask
        outer = grid.outer_vcell_mask
        if event.kind == "con":
            anchored = anchored_component(ds, outer)
            return bool((anchored & inner).any()), None
        hits, labels = _crossing_labels(ds, inner, outer)
        return len(hits) >= 2, None

    if event.kind == "around":
        (u, m) = event.params
        return detect_around(snapshot, tuple(int(x) for x in u), int(m), ds=ds), None

    if event.kind == "fractality":
        alpha, n_out, m_box = event.params
        return detect_fractality(snapshot, float(alpha), int(n_out), int(m_box), ds=ds)

    raise ValueError(f"unknown event {event.kind!r}")


def detect_around(snapshot: PairSnapshot, u, m: int, ds: DisagreementSet | None = None) -> bool:
    """Pre-disagreement circuit in Lambda_{m,2m}(u): the circuit exists iff no
    path of non-D sites joins the hole-adjacent rim to the outer rim within
    the annulus (cut check, matching the every-path definition)."""
    grid = snapshot.grid
    if ds is None:
        ds = pre_disagreements(snapshot)
    ann = annulus_extended_mask(grid, m, 2 * m, center=u)
    if not ann.any():
        raise ValueError("annulus outside snapshot region")
    free = ann & ~ds.mask
    labels, n = ndimage.label(free, structure=FOUR_CONN)
    inner_rim = ring_vertex_mask(grid, m + 1, center=u, drop_corners=True) & ann
    outer_rim = ring_vertex_mask(grid, 2 * m, center=u) & ann
    la = np.unique(labels[inner_rim & free])
    lb = np.unique(labels[outer_rim & free])
    la, lb = la[la > 0], lb[lb > 0]
    return len(np.intersect1d(la, lb)) == 0


def detect_around_connected(snapshot: PairSnapshot, u, m: int,
                            ds: DisagreementSet | None = None) -> bool:
    """A single pre-disagreement component blocks the annulus Lambda_{m,2m}(u).

    Stronger than detect_around: the blocking set must lie in one component
    of D restricted to the annulus.  This is the form whose conjunction with
    a boundary touch implies a disagreement circuit (a disconnected blocking
    set may contain isolated edge sites that never join the anchored set)."""
    grid = snapshot.grid
    if ds is None:
        ds = pre_disagreements(snapshot)
    ann = annulus_extended_mask(grid, m, 2 * m, center=u)
    labels, n = ndimage.label(ds.mask & ann, structure=FOUR_CONN)
    inner_rim = ring_vertex_mask(grid, m + 1, center=u, drop_corners=True) & ann
    outer_rim = ring_vertex_mask(grid, 2 * m, center=u) & ann
    for lab in range(1, n + 1):
        keep = labels == lab
        free = ann & ~keep
        flab, _ = ndimage.label(free, structure=FOUR_CONN)
        la = np.unique(flab[inner_rim & free])
        lb = np.unique(flab[outer_rim & free])
        la, lb = la[la > 0], lb[lb > 0]
        if len(np.intersect1d(la, lb)) == 0:
            return True
    return False


def detect_daround(snapshot: PairSnapshot, u, m: int) -> bool:
    """Disagreement circuit: a circuit within the boundary-anchored set."""
    ds = pre_disagreements(snapshot)
    anchored = boundary_anchored(ds)
    grid = snapshot.grid
    ann = annulus_extended_mask(grid, m, 2 * m, center=u)
    free = ann & ~(anchored & ann)
    labels, _ = ndimage.label(free, structure=FOUR_CONN)
    inner_rim = ring_vertex_mask(grid, m + 1, center=u, drop_corners=True) & ann
    outer_rim = ring_vertex_mask(grid, 2 * m, center=u) & ann
    la = np.unique(labels[inner_rim & free])
    lb = np.unique(labels[outer_rim & free])
    la, lb = la[la > 0], lb[lb > 0]
    return len(np.intersect1d(la, lb)) == 0


# ---------------------------------------------------------------------------
# Fractality: box counts of crossing witnesses


def box_index(grid: RegionGrid, m_box: int, n_half: int):
    """Doubled-cell -> M-box index arrays (tiling anchored at (-N, -N))."""
    side = 2 * (2 * m_box + 1)
    ys = (np.arange(grid.dshape[0]) + grid.dy0 + 2 * n_half) // side
    xs = (np.arange(grid.dshape[1]) + grid.dx0 + 2 * n_half) // side
    return ys[:, None], xs[None, :]


def boxes_hit(grid: RegionGrid, component_mask: np.ndarray, m_box: int, n_half: int,
              within: np.ndarray | None = None) -> int:
    """Number of distinct M-boxes intersected by a component (optionally
    restricted to a sub-mask such as the middle annulus)."""
    mask = component_mask if within is None else (component_mask & within)
    if not mask.any():
        return 0
    by, bx = box_index(grid, m_box, n_half)
    rows, cols = np.nonzero(mask)
    ids = by[rows, 0] * (10 ** 9) + bx[0, cols]
    return int(len(np.unique(ids)))


def path_boxes_hit(grid: RegionGrid, path, m_box: int, n_half: int,
                   within: np.ndarray | None = None) -> int:
    mask = np.zeros(grid.dshape, dtype=bool)
    for r, c in path:
        mask[r, c] = True
    return boxes_hit(grid, mask, m_box, n_half, within=within)


def detect_fractality(snapshot: PairSnapshot, alpha: float, n_half: int, m_box: int,
                      ds: DisagreementSet | None = None):
    """E_{alpha,N,M}: a crossing of the annulus Lambda_{N/8,N} whose BFS
    witness path hits at most (N/M)^{1+alpha} M-boxes inside Lambda_{N/4,N/2}."""
    grid = snapshot.grid
    if ds is None:
        ds = pre_disagreements(snapshot)
    rho = np.maximum.reduce(np.meshgrid(
        np.abs(np.arange(grid.dshape[1]) + grid.dx0),
        np.abs(np.arange(grid.dshape[0]) + grid.dy0),
    )[::-1])
    inner = ring_vertex_mask(grid, n_half // 8 + 1, drop_corners=True)
    outer = ring_vertex_mask(grid, n_half)
    mid = (rho >= 2 * (n_half // 4)) & (rho <= 2 * (n_half // 2)) & grid.site_mask
    hits, labels = _crossing_labels(ds, inner, outer)
    threshold = (n_half / m_box) ** (1.0 + alpha)
    best = None
    for lab in hits:
        path = _witness(labels, lab, inner, outer)
        if path is None:
            continue
        count = path_boxes_hit(grid, path, m_box, n_half, within=mid)
        if best is None or count < best:
            best = count
    if best is None:
        return False, None
    return bool(best <= threshold), best


# ---------------------------------------------------------------------------
# Swap map and the pair partial order


def swap(snapshot: PairSnapshot, s_mask: np.ndarray, a_mask: np.ndarray) -> PairSnapshot:
    """R^A_S: exchange the two configurations on D_S unless D_S meets A."""
    ds = pre_disagreements(snapshot)
    target = anchored_component(ds, s_mask)
    if (target & a_mask).any():
        return snapshot
    plus = snapshot.plus.copy()
    minus = snapshot.minus.copy()
    plus[target], minus[target] = snapshot.minus[target], snapshot.plus[target]
    return PairSnapshot(grid=snapshot.grid, plus=plus, minus=minus)


def pair_leq(a: PairSnapshot, b: PairSnapshot) -> bool:
    """(a.plus, a.minus) <= (b.plus, b.minus) in the pair order (first
    coordinate pointwise <=, second pointwise >=) on the site mask."""
    m = a.grid.site_mask
    return bool(np.all(a.plus[m] <= b.plus[m]) and np.all(a.minus[m] >= b.minus[m]))


def pair_join(a: PairSnapshot, b: PairSnapshot) -> PairSnapshot:
    return PairSnapshot(
        grid=a.grid,
        plus=np.maximum(a.plus, b.plus),
        minus=np.minimum(a.minus, b.minus),
    )


def pair_meet(a: PairSnapshot, b: PairSnapshot) -> PairSnapshot:
    return PairSnapshot(
        grid=a.grid,
        plus=np.minimum(a.plus, b.plus),
        minus=np.maximum(a.minus, b.minus),
    )


def pair_join_meet(a: PairSnapshot, b: PairSnapshot):
    """Sitewise (max, min) in the first coordinate and (min, max) in the
    second: the lattice operations of the pair order."""
    return pair_join(a, b), pair_meet(a, b)
