"""Exhaustive pair-extended enumeration on tiny graphs (swap invariance).

The swap map preserves the product measure iff it preserves the density
pointwise (it is an involution), so invariance is checked state by state:
w(x) = w(R(x)) for every state x and every anchor pair (S, A).  The one-site
cross graph (a center vertex, four frozen neighbors, four edge sites) is
small enough to enumerate all pair states outright; on box(1) the same
pointwise criterion is checked on seeded random states with the exact
density.
"""

from __future__ import annotations

import itertools

import numpy as np

from .model import T_C, edge_lambda, edge_t2


def _w_factor(a, b, lam, t):
    if b == 0:
        return lam * t
    return lam if a == b else 0.0


class TinyPairGraph:
    """Vertices (some frozen) plus edge sites with explicit adjacency."""

    def __init__(self, free_vertices, frozen, edges, T=T_C, field=None):
        # free_vertices: list of ids; frozen: {id: spin}; edges: list of (u, v)
        self.free = list(free_vertices)
        self.frozen = dict(frozen)
        self.edges = list(edges)
        self.T = T
        self.lam = edge_lambda(T)
        self.t = float(np.sqrt(edge_t2(T)))
        self.field = field or {}
        self.sites = (["v%d" % v for v in self.free]
                      + ["f%d" % v for v in sorted(self.frozen)]
                      + ["e%d" % k for k in range(len(self.edges))])
        self.adj = {s: set() for s in self.sites}
        for k, (u, v) in enumerate(self.edges):
            e = "e%d" % k
            for w in (u, v):
                name = ("v%d" % w) if w in self.free else ("f%d" % w)
                self.adj[e].add(name)
                self.adj[name].add(e)

    def vertex_value(self, state, v, copy):
        if v in self.frozen:
            return self.frozen[v] if copy == 0 else self._frozen2[v]
        return state[copy][0][self.free.index(v)]

    def copy_weight(self, spins, edge_vals, frozen):
        w = 1.0
        for k, (u, v) in enumerate(self.edges):
            su = frozen[u] if u in frozen else spins[self.free.index(u)]
            sv = frozen[v] if v in frozen else spins[self.free.index(v)]
            w *= _w_factor(su, edge_vals[k], self.lam, self.t)
            w *= _w_factor(sv, edge_vals[k], self.lam, self.t)
            if w == 0.0:
                return 0.0
        for i, v in enumerate(self.free):
            w *= np.exp(self.field.get(v, 0.0) * spins[i] / self.T)
        return w

    def states(self, frozen_a, frozen_b):
        """All positive-weight pair states and their product densities."""
        out = []
        n = len(self.free)
        m = len(self.edges)
        for spins_a in itertools.product((1, -1), repeat=n):
            for evals_a in itertools.product((1, 0, -1), repeat=m):
                wa = self.copy_weight(spins_a, evals_a, frozen_a)
                if wa == 0.0:
                    continue
                for spins_b in itertools.product((1, -1), repeat=n):
                    for evals_b in itertools.product((1, 0, -1), repeat=m):
                        wb = self.copy_weight(spins_b, evals_b, frozen_b)
                        if wb == 0.0:
                            continue
                        out.append(((spins_a, evals_a, spins_b, evals_b), wa * wb))
        return out

    def site_values(self, state, frozen_a, frozen_b):
        """Per-site (plus, minus) values including frozen vertices."""
        spins_a, evals_a, spins_b, evals_b = state
        vals = {}
        for i, v in enumerate(self.free):
            vals["v%d" % v] = (spins_a[i], spins_b[i])
        for v in self.frozen:
            vals["f%d" % v] = (frozen_a[v], frozen_b[v])
        for k in range(len(self.edges)):
            vals["e%d" % k] = (evals_a[k], evals_b[k])
        return vals

    def d_components(self, vals):
        d_sites = {s for s, (a, b) in vals.items() if a > b}
        comps = []
        seen = set()
        for s in d_sites:
            if s in seen:
                continue
            comp = {s}
            stack = [s]
            seen.add(s)
            while stack:
                cur = stack.pop()
                for nb in self.adj[cur]:
                    if nb in d_sites and nb not in seen:
                        seen.add(nb)
                        comp.add(nb)
                        stack.append(nb)
            comps.append(frozenset(comp))
        return comps

    def swap_state(self, state, s_set, a_set, frozen_a, frozen_b):
        vals = self.site_values(state, frozen_a, frozen_b)
        comps = self.d_components(vals)
        target = set()
        for comp in comps:
            if comp & s_set:
                target |= comp
        if target & a_set:
            return state
        spins_a, evals_a, spins_b, evals_b = (list(state[0]), list(state[1]),
                                              list(state[2]), list(state[3]))
        for s in target:
            if s.startswith("v"):
                i = self.free.index(int(s[1:]))
                spins_a[i], spins_b[i] = spins_b[i], spins_a[i]
            elif s.startswith("e"):
                k = int(s[1:])
                evals_a[k], evals_b[k] = evals_b[k], evals_a[k]
            else:
                # cannot happen when the anchor contains the frozen set: the
                # component of a frozen pre-disagreement meets A and the map
                # is the identity there.
                raise AssertionError("swap reached a frozen site")
        return (tuple(spins_a), tuple(evals_a), tuple(spins_b), tuple(evals_b))


def cross_graph_swap_check():
    """Exhaustive pointwise invariance on the cross graph for a family of
    (S, A) anchor pairs, with a field on the center."""
    g = TinyPairGraph(
        free_vertices=[0],
        frozen={1: 1, 2: 1, 3: -1, 4: 1},
        edges=[(0, 1), (0, 2), (0, 3), (0, 4)],
        field={0: 0.6},
    )
    frozen_a = {1: 1, 2: 1, 3: -1, 4: 1}
    frozen_b = {1: -1, 2: 1, 3: -1, 4: -1}
    states = g.states(frozen_a, frozen_b)
    dens = {s: w for s, w in states}
    site_list = list(g.sites)
    rng = np.random.default_rng(3)
    anchor_pairs = []
    boundary = {s for s in site_list if s.startswith("f")}
    # invariance holds for anchors containing the boundary-condition support
    for s in site_list:
        anchor_pairs.append(({s}, boundary))
        anchor_pairs.append(({s}, boundary | {site_list[0]}))
    for _ in range(120):
        s_set = {s for s in site_list if rng.random() < 0.4}
        extra = {s for s in site_list if rng.random() < 0.3}
        anchor_pairs.append((s_set, boundary | extra))
    worst = 0.0
    checked = 0
    for s_set, a_set in anchor_pairs:
        for state, w in states:
            image = g.swap_state(state, s_set, a_set, frozen_a, frozen_b)
            w2 = dens.get(image)
            if w2 is None:
                return False, f"swap image left the state space for S={s_set}, A={a_set}"
            worst = max(worst, abs(w - w2))
            checked += 1
    ok = worst <= 1e-10
    return ok, f"{checked} state-anchor checks, max density change {worst:.2e}"


def box1_swap_density_check(n_states=400):
    """Pointwise density preservation for the swap on box(1) with all 12
    within-region edge sites, on seeded random states."""
    ring = [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)]
    ids = {p: k + 1 for k, p in enumerate(ring)}
    edges = [(0, ids[(1, 0)]), (0, ids[(0, 1)]), (0, ids[(-1, 0)]), (0, ids[(0, -1)])]
    for k in range(8):
        a, b = ring[k], ring[(k + 1) % 8]
        if max(abs(a[0] - b[0]), abs(a[1] - b[1])) == 1 and abs(a[0] - b[0]) + abs(a[1] - b[1]) == 1:
            edges.append((ids[a], ids[b]))
    frozen_a = {ids[p]: 1 for p in ring}
    frozen_b = {ids[p]: -1 for p in ring}
    g = TinyPairGraph(free_vertices=[0], frozen=frozen_a, edges=edges, field={0: -0.4})

    rng = np.random.default_rng(9)
    lam, t = g.lam, g.t
    p_open = 1.0 / (1.0 + t * t)

    def sample_copy(frozen):
        spins = (1 if rng.random() < 0.5 else -1,)
        evals = []
        for (u, v) in g.edges:
            su = frozen[u] if u in frozen else spins[0]
            sv = frozen[v] if v in frozen else spins[0]
            if su != sv:
                evals.append(0)
            else:
                evals.append(su if rng.random() < p_open else 0)
        return spins, tuple(evals)

    site_list = list(g.sites)
    boundary = {s for s in site_list if s.startswith("f")}
    worst = 0.0
    for _ in range(n_states):
        sa, ea = sample_copy(frozen_a)
        sb, eb = sample_copy(frozen_b)
        state = (sa, ea, sb, eb)
        wa = g.copy_weight(sa, ea, frozen_a)
        wb = g.copy_weight(sb, eb, frozen_b)
        if wa * wb == 0.0:
            continue
        s_set = {s for s in site_list if rng.random() < 0.3}
        image = g.swap_state(state, s_set, boundary, frozen_a, frozen_b)
        wa2 = g.copy_weight(image[0], image[1], frozen_a)
        wb2 = g.copy_weight(image[2], image[3], frozen_b)
        worst = max(worst, abs(wa * wb - wa2 * wb2))
    ok = worst <= 1e-10
    return ok, f"{n_states} seeded states, max density change {worst:.2e}"
