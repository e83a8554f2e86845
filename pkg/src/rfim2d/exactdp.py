"""Exact connectivity functionals of independent-edge random graphs.

Given a graph whose edges are open independently with known probabilities and
whose vertices carry small flag bitmasks, computes the exact distribution of
the number of open-subgraph components whose accumulated flags satisfy a
(required, forbidden) mask predicate.  This covers two-terminal reliability
(required = source|target), crossings with an avoidance set, and counts of
disjoint crossings.

The computation sweeps the edges in a caller-chosen order, maintaining a
probability dictionary over canonical frontier states: the partition of the
still-active vertices (those with unprocessed incident edges) into open
components, each block's flag union, and the number of already-finalized
satisfying components (capped).  With a geometric edge order the frontier
stays narrow and the state dictionary small; correctness does not depend on
the order.
"""

from __future__ import annotations

import math

import numpy as np


def order_edges_rowmajor(edges, pos):
    """Edge order by midpoint (y, x); pos maps vertex id -> (x, y)."""
    def key(e):
        (x1, y1), (x2, y2) = pos[e[0]], pos[e[1]]
        return (y1 + y2, x1 + x2)
    return sorted(range(len(edges)), key=lambda k: key(edges[k]))


def order_edges_angular(edges, pos, center=(0.0, 0.0)):
    """Edge order by midpoint angle around a center, for annular regions."""
    def key(k):
        (x1, y1), (x2, y2) = pos[edges[k][0]], pos[edges[k][1]]
        mx, my = (x1 + x2) / 2.0 - center[0], (y1 + y2) / 2.0 - center[1]
        return (math.atan2(my, mx), mx * mx + my * my)
    return sorted(range(len(edges)), key=key)


def crossing_distribution(
    n_vertices,
    flags,
    edges,
    p_open,
    required=0b11,
    forbidden=0b00,
    cap=2,
    order=None,
):
    """Distribution of the number of satisfying open components.

    flags: per-vertex int bitmask (ORed over a component as it grows).
    edges: sequence of (u, v) pairs; p_open: per-edge open probability.
    A finalized component with flag union f counts iff f & required ==
    required and f & forbidden == 0.  Returns a length-(cap+1) array whose
    last entry aggregates counts >= cap.  Isolated vertices are components.
    """
    flags = [int(f) for f in flags]
    edges = [(int(u), int(v)) for (u, v) in edges]
    p_open = [float(p) for p in p_open]
    if order is None:
        order = range(len(edges))
    order = list(order)

    def satisfies(f):
        return (f & required) == required and (f & forbidden) == 0

    base = np.zeros(cap + 1)
    last_use = {}
    for step, k in enumerate(order):
        u, v = edges[k]
        last_use[u] = step
        last_use[v] = step
    n_isolated_hits = sum(
        1 for v in range(n_vertices) if v not in last_use and satisfies(flags[v])
    )
    fin0 = min(cap, n_isolated_hits)

    deact = [[] for _ in range(len(order))]
    for v, step in last_use.items():
        deact[step].append(v)

    active = sorted(last_use)
    posn = {v: i for i, v in enumerate(active)}
    assign0 = tuple(range(len(active)))
    flags0 = tuple(flags[v] for v in active)
    states = {(assign0, flags0, fin0): 1.0}

    def canon(assign, blk_flags):
        remap = {}
        new_assign = []
        new_flags = []
        for a in assign:
            if a not in remap:
                remap[a] = len(new_flags)
                new_flags.append(blk_flags[a])
            new_assign.append(remap[a])
        return tuple(new_assign), tuple(new_flags)

    for step, k in enumerate(order):
        u, v = edges[k]
        p = p_open[k]
        pu, pv = posn[u], posn[v]
        new_states = {}
        for (assign, blk_flags, fin), prob in states.items():
            if p < 1.0:
                key = (assign, blk_flags, fin)
                new_states[key] = new_states.get(key, 0.0) + prob * (1.0 - p)
            if p > 0.0:
                bu, bv = assign[pu], assign[pv]
                if bu == bv:
                    key = (assign, blk_flags, fin)
                    new_states[key] = new_states.get(key, 0.0) + prob * p
                else:
                    lo, hi = (bu, bv) if bu < bv else (bv, bu)
                    mf = list(blk_flags)
                    mf[lo] |= mf[hi]
                    merged = [lo if a == hi else a for a in assign]
                    ca, cf = canon(merged, mf)
                    key = (ca, cf, fin)
                    new_states[key] = new_states.get(key, 0.0) + prob * p

        # deactivate vertices whose last incident edge was just processed
        drop = sorted((posn[w] for w in deact[step]), reverse=True)
        if drop:
            collapsed = {}
            for (assign, blk_flags, fin), prob in new_states.items():
                assign_l = list(assign)
                removed_blocks = []
                for pidx in drop:
                    removed_blocks.append(assign_l[pidx])
                    del assign_l[pidx]
                fin2 = fin
                alive = set(assign_l)
                for b in set(removed_blocks):
                    if b not in alive and satisfies(blk_flags[b]):
                        fin2 = min(cap, fin2 + 1)
                ca, cf = canon(assign_l, blk_flags)
                key = (ca, cf, fin2)
                collapsed[key] = collapsed.get(key, 0.0) + prob
            new_states = collapsed
            for w in deact[step]:
                del posn[w]
            active = [w for w in active if w not in deact[step]]
            posn = {w: i for i, w in enumerate(active)}
        states = new_states

    out = np.zeros(cap + 1)
    for (assign, blk_flags, fin), prob in states.items():
        out[fin] += prob
    return out


def crossing_probability(n_vertices, flags, edges, p_open, required=0b11,
                         forbidden=0b00, order=None):
    """P(at least one satisfying open component)."""
    dist = crossing_distribution(
        n_vertices, flags, edges, p_open, required, forbidden, cap=1, order=order
    )
    return float(dist[1])


def crossing_distribution_bruteforce(
    n_vertices, flags, edges, p_open, required=0b11, forbidden=0b00, cap=2
):
    """2^m reference implementation for testing the DP."""
    m = len(edges)
    out = np.zeros(cap + 1)
    for mask in range(1 << m):
        parent = list(range(n_vertices))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        prob = 1.0
        for k in range(m):
            if mask >> k & 1:
                prob *= p_open[k]
                ra, rb = find(edges[k][0]), find(edges[k][1])
                if ra != rb:
                    parent[ra] = rb
            else:
                prob *= 1.0 - p_open[k]
        acc = {}
        for v in range(n_vertices):
            r = find(v)
            acc[r] = acc.get(r, 0) | int(flags[v])
        count = sum(
            1 for f in acc.values() if (f & required) == required and (f & forbidden) == 0
        )
        out[min(cap, count)] += prob
    return out


def predicate_distribution(n_vertices, flags, edges, p_open, predicates, order=None):
    """Joint satisfaction probabilities for several (required, forbidden)
    component predicates: returns a vector over satisfied-predicate bitmasks.

    Same sweep as crossing_distribution, but the per-state counter is the
    bitmask of predicates already satisfied by some finalized component."""
    flags = [int(f) for f in flags]
    edges = [(int(u), int(v)) for (u, v) in edges]
    p_open = [float(p) for p in p_open]
    if order is None:
        order = range(len(edges))
    order = list(order)
    np_preds = len(predicates)

    def sat_mask(f):
        m = 0
        for i, (req, forb) in enumerate(predicates):
            if (f & req) == req and (f & forb) == 0:
                m |= 1 << i
        return m

    last_use = {}
    for step, k in enumerate(order):
        u, v = edges[k]
        last_use[u] = step
        last_use[v] = step
    base_mask = 0
    for v in range(n_vertices):
        if v not in last_use:
            base_mask |= sat_mask(flags[v])

    deact = [[] for _ in range(len(order))]
    for v, step in last_use.items():
        deact[step].append(v)
    active = sorted(last_use)
    posn = {v: i for i, v in enumerate(active)}
    states = {(tuple(range(len(active))), tuple(flags[v] for v in active), base_mask): 1.0}

    def canon(assign, blk_flags):
        remap, na, nf = {}, [], []
        for a in assign:
            if a not in remap:
                remap[a] = len(nf)
                nf.append(blk_flags[a])
            na.append(remap[a])
        return tuple(na), tuple(nf)

    for step, k in enumerate(order):
        u, v = edges[k]
        p = p_open[k]
        pu, pv = posn[u], posn[v]
        new_states = {}
        for (assign, blk_flags, sat), prob in states.items():
            if p < 1.0:
                key = (assign, blk_flags, sat)
                new_states[key] = new_states.get(key, 0.0) + prob * (1.0 - p)
            if p > 0.0:
                bu, bv = assign[pu], assign[pv]
                if bu == bv:
                    key = (assign, blk_flags, sat)
                else:
                    lo, hi = (bu, bv) if bu < bv else (bv, bu)
                    mf = list(blk_flags)
                    mf[lo] |= mf[hi]
                    ca, cf = canon([lo if a == hi else a for a in assign], mf)
                    key = (ca, cf, sat)
                new_states[key] = new_states.get(key, 0.0) + prob * p
        drop = sorted((posn[w] for w in deact[step]), reverse=True)
        if drop:
            collapsed = {}
            for (assign, blk_flags, sat), prob in new_states.items():
                assign_l = list(assign)
                removed = []
                for pidx in drop:
                    removed.append(assign_l[pidx])
                    del assign_l[pidx]
                sat2 = sat
                alive = set(assign_l)
                for b in set(removed):
                    if b not in alive:
                        sat2 |= sat_mask(blk_flags[b])
                ca, cf = canon(assign_l, blk_flags)
                key = (ca, cf, sat2)
                collapsed[key] = collapsed.get(key, 0.0) + prob
            new_states = collapsed
            for w in deact[step]:
                del posn[w]
            active = [w for w in active if w not in deact[step]]
            posn = {w: i for i, w in enumerate(active)}
        states = new_states

    out = np.zeros(1 << np_preds)
    for (_, _, sat), prob in states.items():
        out[sat] += prob
    return out
