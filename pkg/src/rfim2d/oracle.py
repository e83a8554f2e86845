"""Exact computations on tiny instances by exhaustive enumeration.

Three independent computational routes live here, deliberately kept separate
so that cross-checks are meaningful:

* Vertex route: enumerate interior spin configurations of the Ising model
  (edge spins marginalized analytically), giving partition functions, spin
  averages, correlations and the Gibbs probability vector.
* FK route: enumerate interior-interior bond configurations with the
  random-cluster weights (p^o (1-p)^c, 2cosh(h_C/T) per free cluster,
  exp((h_{C+}-h_{C-})/T), boundary-attachment marginalized in closed form,
  C+ never connected to C-).
* Pair route: product of two extended measures sharing one field.  The
  pre-disagreement vertex set is aggregated over both spin enumerations and
  connectivity events are evaluated exactly on the candidate edges (both
  endpoints pre-disagreeing), which are open independently with probability
  q = 1 - (1-p)^2.

Instances are capped at 2^20 interior configurations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .exactdp import crossing_distribution, order_edges_angular, order_edges_rowmajor
from .lattice import Region
from .model import GibbsSpec, SpecError, coupling_tables, local_couplings

ENUM_CAP = 20
TOL = 1e-10


class OracleError(ValueError):
    pass


@dataclass(frozen=True)
class EventSpec:
    """A predicate identifier plus parameters (pure function of a configuration
    or a configuration pair)."""

    kind: str
    params: tuple = ()


# ---------------------------------------------------------------------------
# Vertex route


class VertexModel:
    """Exact Gibbs vector over interior spin configurations.

    Configuration c in [0, 2^n): spin_i = +1 iff bit i of c is set, interior
    vertices indexed row-major.  Log-space throughout; the partition function
    here is the standard one (edges with at least one interior endpoint).
    """

    def __init__(self, spec: GibbsSpec):
        n = spec.region.n_interior
        if n > ENUM_CAP:
            raise OracleError(
                f"instance has {n} interior vertices; enumeration capped at {ENUM_CAP} (2^{ENUM_CAP})"
            )
        self.spec = spec
        self.n = n
        tables = coupling_tables(spec.region)
        self.tables = tables
        beta = 1.0 / spec.T
        nconf = 1 << n
        c = np.arange(nconf, dtype=np.uint32)
        spins = np.zeros((nconf, max(n, 1)), dtype=np.int8)
        for i in range(n):
            spins[:, i] = np.where((c >> np.uint32(i)) & np.uint32(1), 1, -1)
        self.spins = spins
        local = local_couplings(spec)
        energy = spins[:, : n] @ local if n else np.zeros(1)
        for i, j in tables.int_int.tolist():
            energy = energy + spins[:, i].astype(np.float64) * spins[:, j]
        self.log_weights = beta * energy
        self.logZ = float(_logsumexp(self.log_weights))
        self.probs = np.exp(self.log_weights - self.logZ)

    def expectation(self, values) -> float:
        return float(np.dot(self.probs, values))

    def spin_average(self, vertices) -> float:
        idx = self.spec.region.interior_index()
        cols = []
        for v in np.asarray(vertices, dtype=np.int64).reshape(-1, 2).tolist():
            key = (int(v[0]), int(v[1]))
            if key not in idx:
                raise OracleError(f"{key} is not an interior vertex")
            cols.append(idx[key])
        if not cols:
            return 1.0
        prod = np.ones(len(self.probs))
        for i in cols:
            prod = prod * self.spins[:, i]
        return self.expectation(prod)


def _logsumexp(a):
    m = np.max(a)
    return m + np.log(np.sum(np.exp(a - m)))


def exact_partition(spec: GibbsSpec) -> float:
    """Z = sum_sigma exp(-H/T), H per the module convention."""
    return float(np.exp(VertexModel(spec).logZ))


def exact_log_partition(spec: GibbsSpec) -> float:
    return VertexModel(spec).logZ


def exact_spin_average(spec: GibbsSpec, v) -> float:
    return VertexModel(spec).spin_average([v])


def exact_correlation(spec: GibbsSpec, vertices, truncated: bool = False) -> float:
    """<sigma^I>, or the truncated pair correlation for I = {u, v}."""
    pts = np.asarray(vertices, dtype=np.int64).reshape(-1, 2)
    if len(pts) > 6:
        raise OracleError("correlation sets capped at |I| <= 6")
    vm = VertexModel(spec)
    if not truncated:
        return vm.spin_average(pts)
    if len(pts) != 2:
        raise OracleError("truncated correlation needs exactly two vertices")
    return vm.spin_average(pts) - vm.spin_average(pts[:1]) * vm.spin_average(pts[1:])


def exact_boundary_influence(spec_plus: GibbsSpec, spec_minus: GibbsSpec, v=(0, 0)) -> float:
    return 0.5 * (exact_spin_average(spec_plus, v) - exact_spin_average(spec_minus, v))


# ---------------------------------------------------------------------------
# Extended route: events measurable on the edge configuration, computed by
# conditioning on vertex spins (edges conditionally independent, open with
# probability p on agreeing pairs).


def _edge_universe(spec: GibbsSpec):
    """Vertex ids (interior 0..n-1, boundary n..n+nb-1), dynamic edges, geometry."""
    t = coupling_tables(spec.region)
    n = spec.region.n_interior
    nb = len(spec.region.boundary)
    pos = {}
    for i, (x, y) in enumerate(spec.region.interior.tolist()):
        pos[i] = (x, y)
    for b, (x, y) in enumerate(spec.region.boundary.tolist()):
        pos[n + b] = (x, y)
    int_int = [(int(i), int(j)) for i, j in t.int_int.tolist()]
    int_bnd = [(int(i), n + int(b)) for i, b in t.int_bnd.tolist()]
    bnd_bnd = [(n + int(a), n + int(b)) for a, b in t.bnd_bnd.tolist()]
    return n, nb, pos, int_int, int_bnd, bnd_bnd


def extended_event_prob(spec: GibbsSpec, event: EventSpec) -> float:
    """Exact probability of an edge-configuration event under the extended
    measure (restricted to edges with an interior endpoint, the Hamiltonian
    edge set, matching the FK route's graph)."""
    vm = VertexModel(spec)
    values = extended_event_values(spec, event, vm)
    return vm.expectation(values)


def extended_event_values(spec: GibbsSpec, event: EventSpec, vm: VertexModel) -> np.ndarray:
    """P(event | sigma) for every interior configuration (field-independent)."""
    n, nb, pos, int_int, int_bnd, _ = _edge_universe(spec)
    xi = spec.xi()
    p = spec.p
    spins = vm.spins
    nconf = len(vm.probs)
    t = coupling_tables(spec.region)

    if event.kind == "edge_open_int":
        k = event.params[0]
        i, j = t.int_int[k]
        return p * (spins[:, i] == spins[:, j]).astype(np.float64)
    if event.kind == "edge_open_bnd":
        k = event.params[0]
        i, b = t.int_bnd[k]
        return p * (spins[:, i] == xi[b]).astype(np.float64)

    idx = spec.region.interior_index()
    out = np.zeros(nconf)
    if event.kind == "one_arm":
        u = idx[tuple(int(x) for x in event.params[0])]
        flags = [0] * (n + nb)
        flags[u] |= 1
        for b in range(nb):
            flags[n + b] |= 2
        required, forbidden = 0b11, 0
    elif event.kind == "connect_avoid_boundary":
        u = idx[tuple(int(x) for x in event.params[0])]
        v = idx[tuple(int(x) for x in event.params[1])]
        flags = [0] * (n + nb)
        flags[u] |= 1
        flags[v] |= 2
        for b in range(nb):
            flags[n + b] |= 4
        required, forbidden = 0b11, 0b100
    else:
        raise OracleError(f"unknown extended event {event.kind!r}")

    all_edges = int_int + int_bnd
    row_order = order_edges_rowmajor(all_edges, pos)
    for c in range(nconf):
        s = spins[c]
        edges, probs = [], []
        for k in row_order:
            a, b = all_edges[k]
            sa = s[a] if a < n else xi[a - n]
            sb = s[b] if b < n else xi[b - n]
            if sa == sb:
                edges.append((a, b))
                probs.append(p)
        out[c] = crossing_distribution(
            n + nb, flags, edges, probs,
            required=required, forbidden=forbidden, cap=1,
        )[1]
    return out


# ---------------------------------------------------------------------------
# FK route: Eq 2.1 weights enumerated over interior-interior bonds with the
# boundary attachments marginalized in closed form per interior cluster.


def fk_event_prob(spec: GibbsSpec, event: EventSpec) -> float:
    return fk_event_probs(spec, [event])[0]


def fk_event_probs(spec: GibbsSpec, events) -> list:
    t = coupling_tables(spec.region)
    n = spec.region.n_interior
    m = len(t.int_int)
    if m > 22:
        raise OracleError(f"FK enumeration capped at 22 interior bonds, got {m}")
    p = spec.p
    beta_h = local_fields_over_T(spec)
    xi = spec.xi()

    # per-vertex counts of boundary edges to the plus and minus parts
    kP = np.zeros(n, dtype=np.int64)
    kM = np.zeros(n, dtype=np.int64)
    for i, b in t.int_bnd.tolist():
        if xi[b] == 1:
            kP[i] += 1
        else:
            kM[i] += 1

    idx = spec.region.interior_index()
    prepared = []
    for ev in events:
        if ev.kind in ("one_arm", "connect_avoid_boundary", "connect"):
            prepared.append((ev.kind, tuple(idx[tuple(int(x) for x in pt)] for pt in ev.params)))
        elif ev.kind == "edge_open_int":
            prepared.append((ev.kind, (int(ev.params[0]),)))
        elif ev.kind == "edge_open_bnd":
            k = int(ev.params[0])
            i, b = t.int_bnd[k]
            prepared.append((ev.kind, (int(i), 1 if xi[b] == 1 else -1)))
        else:
            raise OracleError(f"unknown FK event {ev.kind!r}")

    edges = t.int_int
    total = 0.0
    acc = np.zeros(len(events))
    q = 1.0 - p
    for omega in range(1 << m):
        parent = list(range(n))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        n_open = 0
        for k in range(m):
            if omega >> k & 1:
                n_open += 1
                ra, rb = find(int(edges[k, 0])), find(int(edges[k, 1]))
                if ra != rb:
                    parent[ra] = rb
        base = p ** n_open * q ** (m - n_open)

        hsum, cP, cM = {}, {}, {}
        for v in range(n):
            r = find(v)
            hsum[r] = hsum.get(r, 0.0) + beta_h[v]
            cP[r] = cP.get(r, 0) + int(kP[v])
            cM[r] = cM.get(r, 0) + int(kM[v])

        w_free, w_plus, w_minus, w_all = {}, {}, {}, {}
        weight = base
        for r in hsum:
            f = q ** (cP[r] + cM[r]) * 2.0 * math.cosh(hsum[r])
            wp = (1.0 - q ** cP[r]) * q ** cM[r] * math.exp(hsum[r])
            wm = q ** cP[r] * (1.0 - q ** cM[r]) * math.exp(-hsum[r])
            w_free[r], w_plus[r], w_minus[r] = f, wp, wm
            w_all[r] = f + wp + wm
            weight *= w_all[r]
        total += weight

        for e_i, (kind, params) in enumerate(prepared):
            if kind == "edge_open_int":
                val = weight if (omega >> params[0]) & 1 else 0.0
            elif kind == "one_arm":
                r = find(params[0])
                val = weight / w_all[r] * (w_plus[r] + w_minus[r]) if w_all[r] > 0 else 0.0
            elif kind == "connect_avoid_boundary":
                ru, rv = find(params[0]), find(params[1])
                val = weight / w_all[ru] * w_free[ru] if (ru == rv and w_all[ru] > 0) else 0.0
            elif kind == "connect":
                ru, rv = find(params[0]), find(params[1])
                if ru == rv:
                    val = weight
                else:
                    val = (
                        weight / (w_all[ru] * w_all[rv])
                        * (w_plus[ru] * w_plus[rv] + w_minus[ru] * w_minus[rv])
                        if w_all[ru] > 0 and w_all[rv] > 0
                        else 0.0
                    )
            else:  # edge_open_bnd
                i, sign = params
                r = find(i)
                if sign == 1:
                    repl = p * q ** cM[r] * math.exp(hsum[r])
                else:
                    repl = p * q ** cP[r] * math.exp(-hsum[r])
                val = weight / w_all[r] * repl if w_all[r] > 0 else 0.0
            acc[e_i] += val

    if total <= 0:
        raise OracleError("FK partition sum vanished")
    return list(acc / total)


def local_fields_over_T(spec: GibbsSpec) -> np.ndarray:
    return spec.field_values() / spec.T


# ---------------------------------------------------------------------------
# Pair route: product of two extended measures sharing one field.


@dataclass(frozen=True)
class PairSpec:
    """Two Gibbs specs (plus-chain, minus-chain) sharing region, T, field, eps."""

    plus: GibbsSpec
    minus: GibbsSpec

    def __post_init__(self):
        a, b = self.plus, self.minus
        if a.region is not b.region and not np.array_equal(a.region.vertices, b.region.vertices):
            raise SpecError("pair specs must share the region")
        if a.T != b.T or a.eps != b.eps:
            raise SpecError("pair specs must share T and eps")
        ha = a.field.values if a.field is not None else None
        hb = b.field.values if b.field is not None else None
        if (ha is None) != (hb is None) or (ha is not None and not np.array_equal(ha, hb)):
            raise SpecError("pair specs must share the field")

    @property
    def region(self):
        return self.plus.region

    @property
    def T(self):
        return self.plus.T


def pre_disagreement_weight_table(pair: PairSpec, anti: bool = False) -> np.ndarray:
    """w[D] = P(interior pre-disagreement set equals D), D as a bitmask.

    D = {v : sigma_v^+ = +1 and sigma_v^- = -1} (anti: the reverse).  Both
    copies are enumerated; cost 2^{2n}.
    """
    vm_p, vm_m = VertexModel(pair.plus), VertexModel(pair.minus)
    n = vm_p.n
    if 2 * n > 26:
        raise OracleError(f"pair enumeration capped at 2^26 pairs, got 2^{2*n}")
    nconf = 1 << n
    mask = np.uint32(nconf - 1)
    cm = np.arange(nconf, dtype=np.uint32)
    w = np.zeros(nconf)
    minus_bits = (~cm) & mask      # bits where sigma^- = -1
    plus_bits_m = cm               # bits where sigma^- = +1
    for cp in range(nconf):
        if anti:
            d = np.uint32((~cp) & (nconf - 1)) & plus_bits_m
        else:
            d = np.uint32(cp) & minus_bits
        w += vm_p.probs[cp] * np.bincount(d, weights=vm_m.probs, minlength=nconf)
    return w


def _pair_edge_graph(pair: PairSpec):
    """Vertex ids and the full within-region edge list for pair connectivity."""
    spec = pair.plus
    n, nb, pos, int_int, int_bnd, bnd_bnd = _edge_universe(spec)
    all_edges = int_int + int_bnd + bnd_bnd
    region = spec.region
    if region.kind == "annulus":
        order = order_edges_angular(all_edges, pos, center=region.center)
    else:
        order = order_edges_rowmajor(all_edges, pos)
    all_edges = [all_edges[k] for k in order]
    return n, nb, pos, all_edges


def _pair_boundary_disagreement(pair: PairSpec, anti: bool = False) -> np.ndarray:
    xp, xm = pair.plus.xi(), pair.minus.xi()
    if anti:
        return (xp == -1) & (xm == 1)
    return (xp == 1) & (xm == -1)


def _event_flags(pair: PairSpec, event: EventSpec, n: int, nb: int, bdry_d: np.ndarray):
    """Vertex flag assignment and the vertex universe filter for a pair event."""
    region = pair.region
    idx = region.interior_index()
    bidx = region.boundary_index()
    flags = np.zeros(n + nb, dtype=np.int64)
    keep = np.ones(n + nb, dtype=bool)

    if event.kind == "origin_in_D_boundary":
        v = tuple(int(x) for x in (event.params[0] if event.params else (0, 0)))
        flags[idx[v]] |= 1
        for b in range(nb):
            if bdry_d[b]:
                flags[n + b] |= 2
    elif event.kind in ("con", "con2"):
        if region.kind != "annulus":
            raise OracleError("con events need an annulus region")
        inner = set(map(tuple, region.inner_boundary.tolist()))
        outer = set(map(tuple, region.outer_boundary.tolist()))
        for b, (x, y) in enumerate(region.boundary.tolist()):
            if not bdry_d[b]:
                continue
            if (x, y) in inner:
                flags[n + b] |= 1
            elif (x, y) in outer:
                flags[n + b] |= 2
    elif event.kind == "connect_in_D":
        u = tuple(int(x) for x in event.params[0])
        v = tuple(int(x) for x in event.params[1])
        flags[idx[u]] |= 1
        flags[idx[v]] |= 2
    elif event.kind == "hcross":
        a, b_half = (int(event.params[0]), int(event.params[1]))
        cx, cy = region.center
        for i, (x, y) in enumerate(region.interior.tolist()):
            keep[i] = abs(x - cx) <= a and abs(y - cy) <= b_half
            if keep[i] and x - cx == -a:
                flags[i] |= 1
            if keep[i] and x - cx == a:
                flags[i] |= 2
        for b, (x, y) in enumerate(region.boundary.tolist()):
            keep[n + b] = abs(x - cx) <= a and abs(y - cy) <= b_half and bdry_d[b]
            if keep[n + b] and x - cx == -a:
                flags[n + b] |= 1
            if keep[n + b] and x - cx == a:
                flags[n + b] |= 2
    else:
        raise OracleError(f"unknown pair event {event.kind!r}")
    return flags, keep


_pair_dp_cache: dict = {}


def _pair_cache_key(pair: PairSpec, event: EventSpec, anti: bool):
    r = pair.region
    return (r.kind, r.params, r.center, pair.T,
            pair.plus.xi().tobytes(), pair.minus.xi().tobytes(),
            event.kind, event.params, anti)


def exact_pair_event_distribution(pair: PairSpec, event: EventSpec, anti: bool = False) -> np.ndarray:
    """Exact distribution of the number of satisfying pre-disagreement
    components (0, 1, >=2) under the product measure, via D-aggregation.

    Valid for events that are functions of the pre-disagreement set restricted
    to vertex sites and both-endpoint edge sites (all the crossing events).
    The zero entry is accumulated directly, so probabilities extremely close
    to one keep full relative accuracy in their complement.  The per-D
    conditional distributions are field-independent and cached across calls."""
    w = pre_disagreement_weight_table(pair, anti=anti)
    base_key = _pair_cache_key(pair, event, anti)
    if base_key not in _pair_dp_cache:
        _pair_dp_cache[base_key] = {}
    cache = _pair_dp_cache[base_key]
    n, nb, pos, all_edges = _pair_edge_graph(pair)
    bdry_d = _pair_boundary_disagreement(pair, anti=anti)
    flags, keep = _event_flags(pair, event, n, nb, bdry_d)
    q = 1.0 - (1.0 - pair.plus.p) ** 2

    total = np.zeros(3)
    for d_mask in np.nonzero(w)[0]:
        gkey = int(d_mask)
        if gkey not in cache:
            in_d = np.zeros(n + nb, dtype=bool)
            for i in range(n):
                in_d[i] = bool((int(d_mask) >> i) & 1)
            in_d[n:] = bdry_d
            ok = in_d & keep
            edges = [e for e in all_edges if ok[e[0]] and ok[e[1]]]
            sub_flags = np.where(ok, flags, 0)
            cache[gkey] = crossing_distribution(
                n + nb, sub_flags, edges, [q] * len(edges),
                required=0b11, forbidden=0, cap=2,
            )
        total += w[d_mask] * cache[gkey]
    return total


def exact_pair_event_prob(pair: PairSpec, event: EventSpec, anti: bool = False) -> float:
    dist = exact_pair_event_distribution(pair, event, anti=anti)
    if event.kind == "con2":
        return float(dist[2])
    return float(dist[1] + dist[2])


def exact_pair_noevent_prob(pair: PairSpec, event: EventSpec, anti: bool = False) -> float:
    """P(no satisfying component), accurate even when the event is near-sure."""
    return float(exact_pair_event_distribution(pair, event, anti=anti)[0])


def exact_disagreement_representation(pair: PairSpec, v=(0, 0)):
    """Both sides of the boundary-influence identity: the probability that v
    lies in the boundary-anchored pre-disagreement component, and half the
    difference of the spin averages.  They agree for every field."""
    lhs = exact_pair_event_prob(pair, EventSpec("origin_in_D_boundary", (tuple(v),)))
    rhs = exact_boundary_influence(pair.plus, pair.minus, v)
    return lhs, rhs


def exact_disagreement_count(pair: PairSpec, vertices) -> float:
    """<|Gamma_1 cap D_boundary|> = sum_v P(v in D_boundary)."""
    pts = np.asarray(vertices, dtype=np.int64).reshape(-1, 2)
    return sum(
        exact_pair_event_prob(pair, EventSpec("origin_in_D_boundary", (tuple(v),)))
        for v in pts.tolist()
    )


# ---------------------------------------------------------------------------
# Surface tension and the wired/wired FK connection.


def _split_boundary(region: Region, a1, a2):
    a1 = set(map(tuple, np.asarray(a1, dtype=np.int64).reshape(-1, 2).tolist()))
    a2 = set(map(tuple, np.asarray(a2, dtype=np.int64).reshape(-1, 2).tolist()))
    if a1 & a2:
        raise OracleError("surface tension needs disjoint boundary subsets")
    bset = set(map(tuple, region.boundary.tolist()))
    if (a1 | a2) != bset:
        raise OracleError("A1 and A2 must cover the region boundary")
    return a1, a2


def exact_surface_tension(region: Region, a1, a2, field, eps: float, T: float) -> float:
    """T log(Z^{++} Z^{--} / (Z^{+-} Z^{-+})) with full edge coupling.

    Within-A1 and within-A2 couplings cancel in the ratio; the edges joining
    A1 to A2 contribute the exact term 4 * #E(A1, A2), which is added so the
    value matches the pre-disagreement crossing probability on thin annuli.
    """
    a1, a2 = _split_boundary(region, a1, a2)
    t = coupling_tables(region)
    cross = 0
    for a, b in t.bnd_bnd_pts.tolist():
        pa, pb = tuple(a), tuple(b)
        if (pa in a1 and pb in a2) or (pa in a2 and pb in a1):
            cross += 1

    def logz(s1, s2):
        bc = {v: s1 for v in a1}
        bc.update({v: s2 for v in a2})
        return VertexModel(GibbsSpec(region, T, bc, field, eps)).logZ

    ratio = logz(1, 1) + logz(-1, -1) - logz(1, -1) - logz(-1, 1)
    return T * ratio + 4.0 * cross


def exact_con_distribution(region: Region, field, eps: float, T: float,
                           bc_inner=("+", "-"), bc_outer=("+", "-")) -> np.ndarray:
    """Distribution (0, 1, >=2 crossings) of Con under the product measure with
    per-ring boundary conditions (bc_inner/bc_outer give the plus-chain and
    minus-chain values on the inner and outer rings)."""
    plus = GibbsSpec(region, T, (bc_inner[0], bc_outer[0]), field, eps)
    minus = GibbsSpec(region, T, (bc_inner[1], bc_outer[1]), field, eps)
    return exact_pair_event_distribution(PairSpec(plus, minus), EventSpec("con2"))


def exact_con_probability(region: Region, field, eps: float, T: float,
                          bc_inner=("+", "-"), bc_outer=("+", "-")) -> float:
    dist = exact_con_distribution(region, field, eps, T, bc_inner, bc_outer)
    return float(dist[1] + dist[2])


def exact_wired_wired_disconnection(region: Region, T: float) -> float:
    """1 - phi^{w,w}(inner <-> outer), accumulated directly over the
    opposite-block-spin configurations so near-one connections keep relative
    accuracy."""
    num_opp, den = _wired_wired_sums(region, T)
    return 2.0 * num_opp / den


def exact_wired_wired_connection(region: Region, T: float) -> float:
    """phi^{w,w}(inner ring <-> outer ring) at zero field, via the block-spin
    Edwards-Sokal identity phi(A <-> B) = <s_A s_B> with both rings wired."""
    if region.kind != "annulus":
        raise OracleError("wired/wired connection needs an annulus")
    n = region.n_interior
    if n + 2 > ENUM_CAP + 2:
        raise OracleError("instance too large")
    t = coupling_tables(region)
    inner = set(map(tuple, region.inner_boundary.tolist()))
    is_inner = np.array([tuple(v) in inner for v in region.boundary.tolist()])

    cross_ring = 0
    same_ring_energy_const = 0   # within-ring couplings: constant, dropped
    for a, b in t.bnd_bnd.tolist():
        if is_inner[a] != is_inner[b]:
            cross_ring += 1

    num_opp, den = _wired_wired_sums(region, T)
    return 1.0 - 2.0 * num_opp / den


def _wired_wired_sums(region: Region, T: float):
    """(sum of weights with s_in != s_out, total weight), block-spin model."""
    if region.kind != "annulus":
        raise OracleError("wired/wired connection needs an annulus")
    n = region.n_interior
    if n > ENUM_CAP:
        raise OracleError("instance too large")
    t = coupling_tables(region)
    inner = set(map(tuple, region.inner_boundary.tolist()))
    is_inner = np.array([tuple(v) in inner for v in region.boundary.tolist()])
    cross_ring = 0
    for a, b in t.bnd_bnd.tolist():
        if is_inner[a] != is_inner[b]:
            cross_ring += 1
    beta = 1.0 / T
    nconf = 1 << (n + 2)
    num_opp = 0.0
    den = 0.0
    log_shift = beta * (len(t.int_int) + len(t.int_bnd) + cross_ring)
    for c in range(nconf):
        s = [1 if (c >> i) & 1 else -1 for i in range(n)]
        s_in = 1 if (c >> n) & 1 else -1
        s_out = 1 if (c >> (n + 1)) & 1 else -1
        e = 0.0
        for i, j in t.int_int.tolist():
            e += s[i] * s[j]
        for i, b in t.int_bnd.tolist():
            e += s[i] * (s_in if is_inner[b] else s_out)
        e += cross_ring * s_in * s_out
        w = math.exp(beta * e - log_shift)
        den += w
        if s_in != s_out:
            num_opp += w
    return num_opp, den


def exact_pair_both_to_boundary(pair: PairSpec, u, v) -> float:
    """P(u in D_boundary and v in D_boundary): joint probability of two
    increasing events, via the predicate-set dynamic program."""
    from .exactdp import predicate_distribution

    w = pre_disagreement_weight_table(pair)
    n, nb, pos, all_edges = _pair_edge_graph(pair)
    bdry_d = _pair_boundary_disagreement(pair)
    idx = pair.region.interior_index()
    iu = idx[tuple(int(x) for x in u)]
    iv = idx[tuple(int(x) for x in v)]
    flags = np.zeros(n + nb, dtype=np.int64)
    flags[iu] |= 1
    flags[iv] |= 2
    for b in range(nb):
        if bdry_d[b]:
            flags[n + b] |= 4
    q = 1.0 - (1.0 - pair.plus.p) ** 2
    predicates = [(0b101, 0), (0b110, 0)]
    total = 0.0
    cache = {}
    for d_mask in np.nonzero(w)[0]:
        key = int(d_mask)
        if key not in cache:
            in_d = np.zeros(n + nb, dtype=bool)
            for i in range(n):
                in_d[i] = bool((key >> i) & 1)
            in_d[n:] = bdry_d
            edges = [e for e in all_edges if in_d[e[0]] and in_d[e[1]]]
            sub_flags = np.where(in_d, flags, 0)
            dist = predicate_distribution(n + nb, sub_flags, edges, [q] * len(edges),
                                          predicates)
            cache[key] = float(dist[3])
        total += w[d_mask] * cache[key]
    return total


def exact_event_prob(spec: GibbsSpec, event: EventSpec, model: str = "ising") -> float:
    """Unified exact event probability under one measure.

    model="ising": vertex events ("spin", v, value) and ("product_sign", I).
    model="extended": edge-configuration events via conditional edge laws.
    model="fk": the same events under the random-cluster weights (Eq. route).
    """
    if model == "ising":
        vm = VertexModel(spec)
        idx = spec.region.interior_index()
        if event.kind == "spin":
            v, val = event.params
            col = vm.spins[:, idx[tuple(int(x) for x in v)]]
            return vm.expectation((col == val).astype(float))
        if event.kind == "product_sign":
            pts = [tuple(int(x) for x in p) for p in event.params[0]]
            prod = np.ones(len(vm.probs))
            for p in pts:
                prod = prod * vm.spins[:, idx[p]]
            return vm.expectation((prod > 0).astype(float))
        raise OracleError(f"unknown ising event {event.kind!r}")
    if model == "extended":
        return extended_event_prob(spec, event)
    if model == "fk":
        return fk_event_prob(spec, event)
    raise OracleError(f"unknown model {model!r}")
