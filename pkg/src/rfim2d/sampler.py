"""Monte Carlo kernels targeting the Gibbs measures.

Heat bath: checkerboard sweeps of single-site conditional resampling.
Wolff: FK cluster growth among aligned interior spins (bond probability
p = 1 - exp(-2/T)) with a signed ghost link handling both the Gaussian field
and the frozen boundary: site v links to the ghost with probability
1 - exp(-2|g_v|/T) when sigma_v agrees with sign(g_v), where
g_v = eps*h_v + sum of adjacent boundary spins.  Clusters touching the ghost
are never flipped; others flip with probability 1/2.
Swendsen-Wang: conditional bond resampling followed by cluster-sign
resampling (boundary-attached clusters keep the boundary sign, detached
clusters draw their sign from the cluster field weight).

Chains own their state; snapshots handed to consumers are immutable copies.
All randomness flows from the chain's seeded generator in a fixed order, so
trajectories are bit-reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .disagreement import PairSnapshot
from .disorder import Seed
from .grids import RegionGrid, region_grid
from .model import GibbsSpec, SpecError, T_FLOOR, coupling_tables

__all__ = [
    "UpdateSchedule", "ChainState", "PairState", "default_schedule",
    "heat_bath_sweep", "wolff_update", "sw_update", "conditional_resample",
    "run_coupled_chains", "exact_heat_bath_kernel", "exact_wolff_kernel",
    "exact_sw_kernel", "WiredAnnulusChain",
]


@dataclass(frozen=True)
class UpdateSchedule:
    """Burn-in and measurement plan for one chain (or one coupled pair).

    One snapshot is taken every `thinning` measurement sweeps, so the
    snapshot count is measurement_sweeps // thinning."""

    burn_in_wolff: int
    burn_in_heatbath: int = 20
    measurement_sweeps: int = 2000
    thinning: int = 2            # Wolff updates between snapshots
    heatbath_per_snapshot: int = 0
    sw_per_snapshot: int = 0     # Swendsen-Wang sweeps between snapshots
    burn_in_sw: int = 0

    def __post_init__(self):
        if min(self.burn_in_wolff, self.burn_in_heatbath, self.measurement_sweeps,
               self.heatbath_per_snapshot, self.sw_per_snapshot, self.burn_in_sw) < 0:
            raise SpecError("schedule counts must be >= 0")
        if self.thinning < 1:
            raise SpecError("thinning must be >= 1")

    @property
    def n_snapshots(self) -> int:
        return self.measurement_sweeps // self.thinning

    def to_tuple(self):
        return (self.burn_in_wolff, self.burn_in_heatbath, self.measurement_sweeps,
                self.thinning, self.heatbath_per_snapshot, self.sw_per_snapshot,
                self.burn_in_sw)

    @staticmethod
    def from_tuple(t):
        return UpdateSchedule(*t)


def default_schedule(region, snapshots=1000) -> UpdateSchedule:
    n = max(dim for dim in region.params)
    return UpdateSchedule(burn_in_wolff=20 * n, burn_in_heatbath=20,
                          measurement_sweeps=2 * snapshots, thinning=2)


class ChainState:
    """Single-owner mutable Markov chain state on the vertex grid."""

    def __init__(self, spec: GibbsSpec, seed: Seed, start="plus"):
        if spec.T < T_FLOOR:
            raise SpecError(f"temperature below the sampler floor {T_FLOOR}")
        self.spec = spec
        self.grid = region_grid(spec.region)
        self.rng = seed.generator()
        self.beta = 1.0 / spec.T
        self.p_bond = spec.p
        self.sweeps = 0

        g = self.grid
        spins = np.zeros(g.vshape, dtype=np.int8)
        xi = spec.xi()
        rows, cols = g.vcells(spec.region.boundary)
        spins[rows, cols] = xi
        irows, icols = g.vcells(spec.region.interior)
        if start == "plus":
            spins[irows, icols] = 1
        elif start == "minus":
            spins[irows, icols] = -1
        else:
            spins[irows, icols] = self.rng.choice(np.array([-1, 1], dtype=np.int8),
                                                  size=len(irows))
        self.spins = spins

        field = np.zeros(g.vshape)
        field[irows, icols] = spec.field_values()
        self.field = field

        # boundary coupling seen by each interior site (frozen, merged into ghost)
        bnd = np.where(g.boundary_mask, spins, 0).astype(np.float64)
        b = np.zeros(g.vshape)
        b[1:, :] += bnd[:-1, :]
        b[:-1, :] += bnd[1:, :]
        b[:, 1:] += bnd[:, :-1]
        b[:, :-1] += bnd[:, 1:]
        self.bcoupling = np.where(g.interior_mask, b, 0.0)
        self.ghost = self.bcoupling + field
        self._pghost = np.where(
            g.interior_mask, 1.0 - np.exp(-2.0 * self.beta * np.abs(self.ghost)), 0.0
        )
        self._gsign = np.where(g.interior_mask, np.sign(self.ghost), 0).astype(np.int8)
        n_cells = g.vshape[0] * g.vshape[1]
        # worst case: 1 seed ghost + per site (4 bond coins + 1 ghost) + flip
        self._wolff_buf_len = 5 * n_cells + 2
        self._scratch_stack = np.zeros(n_cells, dtype=np.int64)
        self._scratch_mark = np.zeros(g.vshape, dtype=np.bool_)

        ys = np.arange(g.vshape[0]) + g.vy0
        xs = np.arange(g.vshape[1]) + g.vx0
        parity = (ys[:, None] + xs[None, :]) & 1
        self._color = [g.interior_mask & (parity == c) for c in (0, 1)]
        self._irows, self._icols = irows, icols

    # -- energy bookkeeping --------------------------------------------------

    def energy(self) -> float:
        """-(sum_edges s s + sum b s + sum eps h s), recomputed from scratch.

        Edges with at least one interior endpoint: indicator Ia + Ib - Ia Ib."""
        g = self.grid
        s = np.where(g.vertex_mask, self.spins, 0).astype(np.float64)
        si = np.where(g.interior_mask, self.spins, 0).astype(np.float64)

        def axis_sum(a, b, ai, bi):
            return np.sum(ai * b + a * bi - ai * bi)

        pair = axis_sum(s[:, :-1], s[:, 1:], si[:, :-1], si[:, 1:])
        pair += axis_sum(s[:-1, :], s[1:, :], si[:-1, :], si[1:, :])
        return float(-(pair + np.sum(self.field * si)))

    def magnetization_at(self, v) -> int:
        r, c = self.grid.vcells([v])
        return int(self.spins[r[0], c[0]])

    def copy_spins(self) -> np.ndarray:
        return self.spins.copy()


def heat_bath_sweep(state: ChainState) -> ChainState:
    """One full checkerboard sweep of single-site conditional resampling."""
    s = state.spins
    for color_mask in state._color:
        nb = np.zeros(state.grid.vshape)
        nb[1:, :] += s[:-1, :]
        nb[:-1, :] += s[1:, :]
        nb[:, 1:] += s[:, :-1]
        nb[:, :-1] += s[:, 1:]
        local = nb + state.field
        p_plus = 1.0 / (1.0 + np.exp(-2.0 * state.beta * local))
        u = state.rng.random(state.grid.vshape)
        s[color_mask] = np.where(u[color_mask] < p_plus[color_mask], 1, -1)
    state.sweeps += 1
    return state


def wolff_update(state: ChainState) -> ChainState:
    """One signed-ghost Wolff cluster update (see module docstring).

    Uniform variates are pre-drawn from the chain generator into one buffer
    and consumed in a fixed depth-first order, so trajectories stay
    reproducible; the unused tail of the buffer is discarded."""
    g = state.grid
    rng = state.rng
    n_int = len(state._irows)
    k = int(rng.integers(n_int))
    buf = rng.random(state._wolff_buf_len)
    _wolff_core(
        state.spins, g.interior_mask, state._pghost, state._gsign,
        state.p_bond, int(state._irows[k]), int(state._icols[k]), buf,
        state._scratch_stack, state._scratch_mark,
    )
    state.sweeps += 1
    return state


from numba import njit


@njit(cache=True)
def _wolff_core(spins, interior, pghost, gsign, p_bond, r0, c0, buf, stack, mark):
    """Grow one FK cluster from (r0, c0); flip it unless it linked to the
    ghost.  Consumes buf sequentially: one ghost coin per added site, one bond
    coin per attempted edge, one flip coin at the end."""
    h, w = spins.shape
    mark[:] = False
    s0 = spins[r0, c0]
    cur = 0
    top = 0
    stack[top] = r0 * w + c0
    top += 1
    mark[r0, c0] = True
    frozen = False
    # ghost coin for the seed
    if gsign[r0, c0] == s0:
        if buf[cur] < pghost[r0, c0]:
            frozen = True
    cur += 1
    n_sites = 1
    while top > 0:
        top -= 1
        flat = stack[top]
        r = flat // w
        c = flat - r * w
        for k in range(4):
            if k == 0:
                nr, nc = r + 1, c
            elif k == 1:
                nr, nc = r - 1, c
            elif k == 2:
                nr, nc = r, c + 1
            else:
                nr, nc = r, c - 1
            if nr < 0 or nr >= h or nc < 0 or nc >= w:
                continue
            if not interior[nr, nc] or mark[nr, nc] or spins[nr, nc] != s0:
                continue
            accept = buf[cur] < p_bond
            cur += 1
            if not accept:
                continue
            mark[nr, nc] = True
            stack[top] = nr * w + nc
            top += 1
            n_sites += 1
            if gsign[nr, nc] == s0:
                if buf[cur] < pghost[nr, nc]:
                    frozen = True
            cur += 1
    flip = buf[cur] < 0.5
    if (not frozen) and flip:
        for r in range(h):
            for c in range(w):
                if mark[r, c]:
                    spins[r, c] = -s0
    return n_sites


def sw_update(state: ChainState) -> ChainState:
    """Swendsen-Wang: bond resample, then cluster-sign resample.

    Clusters attached to the boundary keep their (boundary-forced) sign;
    detached clusters draw a fresh sign from exp(h_C/T)/2cosh(h_C/T)."""
    from scipy import ndimage

    bonds = conditional_resample(state, mode="fk_bonds")
    g = state.grid
    lab, n = _bond_components(g, bonds)
    if n == 0:
        state.sweeps += 1
        return state
    attached = np.zeros(n + 1, dtype=bool)
    bl = lab[g.boundary_mask & (lab > 0)]
    attached[np.unique(bl)] = True
    hsum = np.zeros(n + 1)
    np.add.at(hsum, lab[g.interior_mask], state.beta * state.field[g.interior_mask])
    u = state.rng.random(n + 1)
    p_plus = 1.0 / (1.0 + np.exp(-2.0 * hsum))
    new_sign = np.where(u < p_plus, 1, -1).astype(np.int8)
    old = state.spins
    keep = attached[lab]
    cluster_sign = np.where(keep, old, new_sign[lab]).astype(np.int8)
    state.spins = np.where(g.interior_mask, cluster_sign, old).astype(np.int8)
    state.sweeps += 1
    return state


def _bond_components(g: RegionGrid, bonds):
    """Label vertex cells by open-bond components (via the doubled grid)."""
    from scipy import ndimage
    from .grids import FOUR_CONN

    dd = np.zeros(g.dshape, dtype=bool)
    dd[g.vcell_mask] = True
    hr, hc, hopen = bonds["h"]
    vr, vc, vopen = bonds["v"]
    dd[hr[hopen], hc[hopen]] = True
    dd[vr[vopen], vc[vopen]] = True
    lab_d, n = ndimage.label(dd, structure=FOUR_CONN)
    lab = np.zeros(g.vshape, dtype=np.int32)
    rows, cols = np.nonzero(g.vertex_mask)
    drows = 2 * (rows + g.vy0) - g.dy0
    dcols = 2 * (cols + g.vx0) - g.dx0
    lab[rows, cols] = lab_d[drows, dcols]
    return lab, n


def conditional_resample(state: ChainState, mode: str = "extended_edges"):
    """Resample edge variables given the vertex spins.

    extended_edges: each within-region edge with agreeing endpoints of value a
    gets sigma_e = a with probability 1/(1+t^2) = p, else 0; disagreeing
    endpoints force 0.  Returns the doubled-grid int8 array of edge values.
    fk_bonds: agreeing edges open with probability p; returns index arrays.
    """
    g = state.grid
    s = state.spins
    vmask = g.vertex_mask
    p = state.p_bond
    rng = state.rng

    # horizontal edges: (x,y)-(x+1,y) with both endpoints in the region
    hpair = vmask[:, :-1] & vmask[:, 1:]
    agree_h = hpair & (s[:, :-1] == s[:, 1:])
    uh = rng.random(hpair.shape)
    open_h = agree_h & (uh < p)
    # vertical edges
    vpair = vmask[:-1, :] & vmask[1:, :]
    agree_v = vpair & (s[:-1, :] == s[1:, :])
    uv = rng.random(vpair.shape)
    open_v = agree_v & (uv < p)

    rows_h, cols_h = np.nonzero(hpair)
    drows_h = 2 * (rows_h + g.vy0) - g.dy0
    dcols_h = 2 * (cols_h + g.vx0) + 1 - g.dx0
    rows_v, cols_v = np.nonzero(vpair)
    drows_v = 2 * (rows_v + g.vy0) + 1 - g.dy0
    dcols_v = 2 * (cols_v + g.vx0) - g.dx0

    if mode == "fk_bonds":
        return {
            "h": (drows_h, dcols_h, open_h[rows_h, cols_h]),
            "v": (drows_v, dcols_v, open_v[rows_v, cols_v]),
        }
    if mode != "extended_edges":
        raise SpecError(f"unknown resample mode {mode!r}")

    ext = np.zeros(g.dshape, dtype=np.int8)
    vals_h = np.where(open_h, s[:, :-1], 0)[rows_h, cols_h]
    ext[drows_h, dcols_h] = vals_h
    vals_v = np.where(open_v, s[:-1, :], 0)[rows_v, cols_v]
    ext[drows_v, dcols_v] = vals_v
    return ext


def assemble_snapshot(plus: ChainState, minus: ChainState) -> PairSnapshot:
    """Resample edge spins for both chains and freeze an extended pair."""
    g = plus.grid
    arr_p = conditional_resample(plus, "extended_edges")
    arr_m = conditional_resample(minus, "extended_edges")
    for arr, st in ((arr_p, plus), (arr_m, minus)):
        rows, cols = np.nonzero(g.vertex_mask)
        arr[2 * (rows + g.vy0) - g.dy0, 2 * (cols + g.vx0) - g.dx0] = st.spins[rows, cols]
        _fill_sticking(g, arr, st.spins)
    return PairSnapshot(grid=g, plus=arr_p, minus=arr_m)


def _fill_sticking(g: RegionGrid, arr, spins):
    t = coupling_tables(g.region)
    pts = t.sticking_pts
    if len(pts) == 0:
        return
    inside = pts[:, 0, :]
    mid = pts[:, 0, :] + pts[:, 1, :]
    arr[mid[:, 1] - g.dy0, mid[:, 0] - g.dx0] = spins[inside[:, 1] - g.vy0, inside[:, 0] - g.vx0]


@dataclass
class PairState:
    """Two chains (plus-chain, minus-chain) sharing region and field."""

    plus: ChainState
    minus: ChainState

    def __post_init__(self):
        a, b = self.plus.spec, self.minus.spec
        if not np.array_equal(a.region.vertices, b.region.vertices):
            raise SpecError("pair chains must share the region")
        ha = a.field.values if a.field is not None else None
        hb = b.field.values if b.field is not None else None
        if (ha is None) != (hb is None) or (ha is not None and not np.array_equal(ha, hb)):
            raise SpecError("pair chains must share the field")

    def snapshot(self) -> PairSnapshot:
        return assemble_snapshot(self.plus, self.minus)


def run_coupled_chains(spec_plus: GibbsSpec, spec_minus: GibbsSpec,
                       schedule: UpdateSchedule, seed: Seed):
    """Generator of PairSnapshot measurements (deterministic given seed)."""
    if schedule.n_snapshots == 0:
        raise SpecError("schedule has zero measurements")
    pair = PairState(
        plus=ChainState(spec_plus, seed.derived("chain-plus"), start="plus"),
        minus=ChainState(spec_minus, seed.derived("chain-minus"), start="minus"),
    )
    for st in (pair.plus, pair.minus):
        for _ in range(schedule.burn_in_wolff):
            wolff_update(st)
        for _ in range(schedule.burn_in_sw):
            sw_update(st)
        for _ in range(schedule.burn_in_heatbath):
            heat_bath_sweep(st)
    for _ in range(schedule.n_snapshots):
        for st in (pair.plus, pair.minus):
            for _ in range(schedule.thinning):
                wolff_update(st)
            for _ in range(schedule.sw_per_snapshot):
                sw_update(st)
            for _ in range(schedule.heatbath_per_snapshot):
                heat_bath_sweep(st)
        yield pair.snapshot()


# ---------------------------------------------------------------------------
# Exact transition kernels on enumerable instances (stationarity checks)


def _sorted_interior_states(n):
    return [tuple(1 if (c >> i) & 1 else -1 for i in range(n)) for c in range(1 << n)]


def exact_heat_bath_kernel(spec: GibbsSpec) -> np.ndarray:
    """Exact one-sweep heat-bath kernel (checkerboard order) on <= 12 spins."""
    from .model import local_couplings

    region = spec.region
    n = region.n_interior
    if n > 12:
        raise SpecError("exact kernel capped at 12 interior spins")
    t = coupling_tables(region)
    local = local_couplings(spec)
    beta = 1.0 / spec.T
    nbrs = [[] for _ in range(n)]
    for i, j in t.int_int.tolist():
        nbrs[i].append(j)
        nbrs[j].append(i)
    pts = region.interior
    order = sorted(range(n), key=lambda i: ((pts[i, 0] + pts[i, 1]) & 1, i))

    nstates = 1 << n
    kernel = np.eye(nstates)
    for i in order:
        site = np.zeros((nstates, nstates))
        for c in range(nstates):
            s = [1 if (c >> k) & 1 else -1 for k in range(n)]
            h = local[i] + sum(s[j] for j in nbrs[i])
            p_plus = 1.0 / (1.0 + math.exp(-2.0 * beta * h))
            c_plus = c | (1 << i)
            c_minus = c & ~(1 << i)
            site[c, c_plus] = p_plus
            site[c, c_minus] = 1.0 - p_plus
        kernel = kernel @ site
    return kernel


def exact_wolff_kernel(spec: GibbsSpec) -> np.ndarray:
    """Exact single-update Wolff kernel on a 1-interior-spin instance."""
    region = spec.region
    if region.n_interior != 1:
        raise SpecError("exact Wolff kernel implemented for one interior spin")
    from .model import local_couplings

    g = float(local_couplings(spec)[0])
    beta = 1.0 / spec.T
    kernel = np.zeros((2, 2))
    for c, s in enumerate((-1, 1)):
        if g != 0 and s == np.sign(g):
            p_ghost = 1.0 - math.exp(-2.0 * beta * abs(g))
        else:
            p_ghost = 0.0
        p_flip = (1.0 - p_ghost) * 0.5
        kernel[c, 1 - c] = p_flip
        kernel[c, c] = 1.0 - p_flip
    return kernel


def exact_sw_kernel(spec: GibbsSpec) -> np.ndarray:
    """Exact spins->bonds->cluster-sign->spins kernel on a 1-spin instance."""
    region = spec.region
    if region.n_interior != 1:
        raise SpecError("exact SW kernel implemented for one interior spin")
    t = coupling_tables(region)
    xi = spec.xi()
    p = spec.p
    hf = float(spec.field_values()[0]) / spec.T
    kernel = np.zeros((2, 2))
    for c, s in enumerate((-1, 1)):
        k_agree = sum(1 for _, b in t.int_bnd.tolist() if xi[b] == s)
        p_detached = (1.0 - p) ** k_agree
        p_plus_new = math.exp(hf) / (2.0 * math.cosh(hf))
        kernel[c, 1] += p_detached * p_plus_new
        kernel[c, 0] += p_detached * (1.0 - p_plus_new)
        kernel[c, c] += 1.0 - p_detached
    return kernel


def gibbs_vector(spec: GibbsSpec) -> np.ndarray:
    from .oracle import VertexModel

    return VertexModel(spec).probs


# ---------------------------------------------------------------------------
# Wired/wired annulus FK chain (for the Lemma 4.3 connection estimate)


class WiredAnnulusChain:
    """Ising chain on an annulus with both boundary rings wired into block
    spins; phi^{w,w}(inner <-> outer) is estimated through the Edwards-Sokal
    identity phi(A <-> B) = <s_A s_B>."""

    def __init__(self, region, T, seed: Seed):
        if region.kind != "annulus":
            raise SpecError("wired/wired chain needs an annulus")
        self.region = region
        self.T = T
        self.beta = 1.0 / T
        self.rng = seed.generator()
        t = coupling_tables(region)
        inner = set(map(tuple, region.inner_boundary.tolist()))
        self.is_inner = np.array([tuple(v) in inner for v in region.boundary.tolist()])
        n = region.n_interior
        self.n = n
        self.spins = np.ones(n, dtype=np.int8)
        self.s_in = 1
        self.s_out = 1
        self.nbrs = [[] for _ in range(n)]
        self.k_in = np.zeros(n, dtype=np.int64)
        self.k_out = np.zeros(n, dtype=np.int64)
        for i, j in t.int_int.tolist():
            self.nbrs[i].append(j)
            self.nbrs[j].append(i)
        for i, b in t.int_bnd.tolist():
            if self.is_inner[b]:
                self.k_in[i] += 1
            else:
                self.k_out[i] += 1
        self.cross_ring = sum(
            1 for a, b in t.bnd_bnd.tolist() if self.is_inner[a] != self.is_inner[b]
        )

    def sweep(self):
        rng = self.rng
        for i in range(self.n):
            h = (sum(self.spins[j] for j in self.nbrs[i])
                 + self.k_in[i] * self.s_in + self.k_out[i] * self.s_out)
            p_plus = 1.0 / (1.0 + math.exp(-2.0 * self.beta * h))
            self.spins[i] = 1 if rng.random() < p_plus else -1
        h_in = float(np.dot(self.k_in, self.spins)) + self.cross_ring * self.s_out
        p_plus = 1.0 / (1.0 + math.exp(-2.0 * self.beta * h_in))
        self.s_in = 1 if rng.random() < p_plus else -1
        h_out = float(np.dot(self.k_out, self.spins)) + self.cross_ring * self.s_in
        p_plus = 1.0 / (1.0 + math.exp(-2.0 * self.beta * h_out))
        self.s_out = 1 if rng.random() < p_plus else -1

    def correlation_sample(self) -> int:
        return int(self.s_in * self.s_out)


# ---------------------------------------------------------------------------
# Snapshot dump: compact binary, header plus bit-packed interior spins


def save_spins(state: ChainState, path) -> None:
    """Dump the interior spins bit-packed with a small text header."""
    g = state.grid
    bits = (state.spins[g.interior_mask] > 0).astype(np.uint8)
    packed = np.packbits(bits)
    region = state.spec.region
    header = (f"rfim2d-spins v1 kind={region.kind} "
              f"params={','.join(str(p) for p in region.params)} "
              f"center={region.center[0]},{region.center[1]} "
              f"n={len(bits)} sweeps={state.sweeps}\n")
    with open(path, "wb") as fh:
        fh.write(header.encode())
        fh.write(packed.tobytes())


def load_spins(path):
    """Read a spin dump; returns (region, interior spins array, sweeps)."""
    from .lattice import build_region

    with open(path, "rb") as fh:
        header = fh.readline().decode()
        blob = fh.read()
    fields = dict(part.split("=", 1) for part in header.split()[2:])
    params = tuple(int(x) for x in fields["params"].split(","))
    center = tuple(int(x) for x in fields["center"].split(","))
    region = build_region(fields["kind"], params if len(params) > 1 else params[0], center)
    n = int(fields["n"])
    bits = np.unpackbits(np.frombuffer(blob, dtype=np.uint8))[:n]
    spins = np.where(bits > 0, 1, -1).astype(np.int8)
    return region, spins, int(fields["sweeps"])
