"""The exact identity suite: every paper identity the oracle can check.

Each check returns (passed, detail).  Exact checks use 1e-10 absolute
tolerance (1e-8 for the surface-tension log identity); nothing here samples.
The fast level runs box(1) plus the smallest well-posed annulus; the full
level adds box(2) and the next annulus.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass

import numpy as np

from . import chaos, oracle, sampler
from .disorder import Seed, sample_field, zero_field
from .lattice import (build_region, dual_site, rect_edge_list,
                      vertical_crossing, dual_horizontal_crossing)
from .model import GibbsSpec, T_C, coupling_tables
from .oracle import EventSpec, PairSpec

TOL = 1e-10
TOL_LOG = 1e-8


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float


def _fields(region, n, eps_note=""):
    return [sample_field(region, Seed(1000 + k)) for k in range(n)]


def check_coupling(region, n_fields=5) -> tuple:
    """Lemma 2.4: FK event probabilities equal extended |spin| event
    probabilities, for plus, minus and mixed boundary conditions.

    The extended-route conditional values P(event | sigma) are
    field-independent, so they are computed once per boundary condition and
    reused across the fields."""
    t = coupling_tables(region)
    rng = np.random.default_rng(7)
    mixed = rng.choice([-1, 1], size=len(region.boundary))
    worst = 0.0
    interior = [tuple(p) for p in region.interior.tolist()]
    events = [EventSpec("one_arm", (interior[0],))]
    if len(interior) > 2:
        events.append(EventSpec("one_arm", (interior[2],)))
        events.append(EventSpec("connect_avoid_boundary", (interior[0], interior[1])))
        events.append(EventSpec("connect_avoid_boundary", (interior[1], interior[-1])))
    events += [EventSpec("edge_open_int", (k,)) for k in range(min(3, len(t.int_int)))]
    events += [EventSpec("edge_open_bnd", (k,)) for k in range(min(3, len(t.int_bnd)))]
    fields = _fields(region, n_fields)
    for bc in ("+", "-", mixed):
        spec0 = GibbsSpec(region, T_C, bc)
        vm0 = oracle.VertexModel(spec0)
        value_rows = [oracle.extended_event_values(spec0, ev, vm0) for ev in events]
        for fld in fields:
            spec = GibbsSpec(region, T_C, bc, fld, 0.9)
            fk = oracle.fk_event_probs(spec, events)
            vm = oracle.VertexModel(spec)
            for row, pfk in zip(value_rows, fk):
                worst = max(worst, abs(pfk - float(np.dot(vm.probs, row))))
    return worst <= TOL, f"max |P_FK - P_ext| = {worst:.2e} over {len(events)} events"


def check_disagreement_representation(region, n_fields=5, eps_list=(0.0, 0.3, 1.0, 3.0)):
    """Prop 2.5: P(o in D_boundary) = (1/2)(<s_o>+ - <s_o>-), all fields."""
    worst = 0.0
    for fld in _fields(region, n_fields):
        for eps in eps_list:
            pair = PairSpec(GibbsSpec(region, T_C, "+", fld, eps),
                            GibbsSpec(region, T_C, "-", fld, eps))
            lhs, rhs = oracle.exact_disagreement_representation(pair)
            worst = max(worst, abs(lhs - rhs))
    return worst <= TOL, f"max |LHS-RHS| = {worst:.2e}"


def check_even_cluster(region, n_fields=3):
    """Prop 2.5(2) with V0 = {u, v} under an agreed boundary: the four-point
    product expectation equals 2^2 (P(u<->v in D) + P(u<->v in anti-D))."""
    interior = [tuple(p) for p in region.interior.tolist()]
    if len(interior) < 2:
        return True, "skipped (needs two interior sites)"
    u, v = interior[0], interior[-1]
    worst = 0.0
    for fld in _fields(region, n_fields):
        for bc in ("+", "-"):
            spec = GibbsSpec(region, T_C, bc, fld, 0.8)
            pair = PairSpec(spec, spec)
            p_d = oracle.exact_pair_event_prob(pair, EventSpec("connect_in_D", (u, v)))
            p_a = oracle.exact_pair_event_prob(pair, EventSpec("connect_in_D", (u, v)), anti=True)
            vm = oracle.VertexModel(spec)
            lhs = 2.0 * (vm.spin_average([u, v]) - vm.spin_average([u]) * vm.spin_average([v]))
            worst = max(worst, abs(lhs - 4.0 * (p_d + p_a)))
    return worst <= TOL, f"max defect = {worst:.2e}"


def check_surface_tension(region, n_fields=5, temps=(T_C, 0.7 * T_C)):
    """Lemma 5.2: T log(Z++ Z-- / Z+- Z-+) = -T log P(no crossing) for the
    identity fields, plus the uniform finite bound (via the stable wired/wired
    disconnection) over 20 random fields."""
    worst = 0.0
    bound_margin = math.inf
    for T in temps:
        disc = oracle.exact_wired_wired_disconnection(region, T)
        cap = -T * math.log((disc / (2.0 - disc)) ** 2)
        for k in range(20):
            fld = sample_field(region, Seed(3000 + k))
            eps = [0.0, 0.3, 1.0, 3.0][k % 4]
            st = oracle.exact_surface_tension(
                region, region.outer_boundary, region.inner_boundary, fld, eps, T)
            if k < n_fields:
                dist = oracle.exact_con_distribution(region, fld, eps, T)
                rhs = -T * math.log(dist[0])
                worst = max(worst, abs(st - rhs))
            bound_margin = min(bound_margin, cap - st)
    ok = worst <= TOL_LOG and bound_margin >= -TOL_LOG
    return ok, f"max |identity defect| = {worst:.2e}; min(bound - T_surf) = {bound_margin:.3f}"


def check_chaos_telescoping(region, n_fields=5, eps=0.05):
    """Full expansion reproduces the partition ratio; tails shrink in k_max."""
    spec0 = GibbsSpec(region, T_C, "+")
    worst = 0.0
    mono_ok = True
    for k in range(n_fields):
        fld = sample_field(region, Seed(k))
        tr, ex, tail = chaos.z_ratio_expansion(spec0, fld, 0.8, k_max=region.n_interior)
        worst = max(worst, abs(tail))
        tails = [max(abs(chaos.z_ratio_expansion(spec0, fld, eps, km)[2]), 1e-13)
                 for km in range(region.n_interior + 1)]
        mono_ok &= all(tails[i + 1] <= tails[i] * (1 + 1e-9) for i in range(len(tails) - 1))
    return (worst <= TOL and mono_ok), f"max full-order tail = {worst:.2e}; tails monotone = {mono_ok}"


def check_influence_expansion(region, n_fields=5):
    """The two-copy expansion numerator equals the boundary-influence times
    the two denominators."""
    worst = 0.0
    for k in range(n_fields):
        fld = sample_field(region, Seed(500 + k))
        num, rhs, _ = chaos.boundary_influence_expansion(region, T_C, fld, 0.9)
        worst = max(worst, abs(num - rhs))
    return worst <= TOL, f"max |numerator - m * denominators| = {worst:.2e}"


def check_lemma43(region, n_fields=5):
    """P^{+/-,+/-}(Con) <= 1 - ((1-phi)/(1+phi))^2 with phi the exact
    wired/wired connection (complement algebra throughout so the near-one
    probabilities keep relative accuracy), plus the field-monotone first
    inequality."""
    disc = oracle.exact_wired_wired_disconnection(region, T_C)
    floor = (disc / (2.0 - disc)) ** 2           # lower bound on P(no Con)
    d0_zero = oracle.exact_con_distribution(region, zero_field(region), 0.0, T_C)[0]
    rel = (floor - d0_zero) / floor              # must be <= 0 up to rounding
    worst = rel
    field_mono = -math.inf
    for k in range(n_fields):
        fld = sample_field(region, Seed(700 + k))
        d0 = oracle.exact_con_distribution(region, fld, 1.0, T_C)[0]
        worst = max(worst, (floor - d0) / floor)
        field_mono = max(field_mono, (d0_zero - d0) / d0_zero)
    ok = worst <= 1e-6 and field_mono <= 1e-6    # relative form of the 1e-10 margin
    return ok, (f"1-phi = {disc:.3e}; max rel(floor - P(noCon)) = {worst:.2e}; "
                f"max rel field-monotonicity defect = {field_mono:.2e}")


def check_bk(region, n_random_bc=40):
    """Lemma 4.5 at eps = 0: P(Con2) <= P(Con)^2 for all ring-uniform boundary
    pairs and a seeded sample of fully mixed pairs, in complement form
    a(1-a) - P(exactly one crossing) <= tol with a = P(no crossing)."""
    f0 = zero_field(region)
    worst = -math.inf
    signs = (1, -1)
    cases = []
    for bi_p, bi_m, bo_p, bo_m in itertools.product(signs, repeat=4):
        cases.append(((bi_p, bo_p), (bi_m, bo_m)))
    rng = np.random.default_rng(11)
    nb = len(region.boundary)
    for _ in range(n_random_bc):
        cases.append((rng.choice([-1, 1], size=nb), rng.choice([-1, 1], size=nb)))
    for bc_p, bc_m in cases:
        pair = PairSpec(GibbsSpec(region, T_C, bc_p, f0, 0.0),
                        GibbsSpec(region, T_C, bc_m, f0, 0.0))
        dist = oracle.exact_pair_event_distribution(pair, EventSpec("con2"))
        a, d1 = float(dist[0]), float(dist[1])
        # P(Con2) <= P(Con)^2  <=>  a(1-a) <= d1 (complement algebra)
        worst = max(worst, a * (1.0 - a) - d1)
    return worst <= TOL, f"max BK defect over {len(cases)} bc pairs = {worst:.2e}"


def check_kernels(region):
    """Heat-bath / Wolff / SW kernels fix the exact Gibbs vector."""
    worst = 0.0
    for eps in (0.0, 1.0):
        for bc in ("+", "-"):
            fld = sample_field(region, Seed(5))
            spec = GibbsSpec(region, T_C, bc, fld, eps)
            pi = sampler.gibbs_vector(spec)
            kernels = [sampler.exact_heat_bath_kernel(spec)]
            if region.n_interior == 1:
                kernels.append(sampler.exact_wolff_kernel(spec))
                kernels.append(sampler.exact_sw_kernel(spec))
            for K in kernels:
                worst = max(worst, float(np.max(np.abs(pi @ K - pi))))
    return worst <= TOL, f"max |pi K - pi| = {worst:.2e}"


def check_swap_invariance():
    """Swap maps preserve the product density pointwise: exhaustive on the
    one-site cross graph, seeded states on box(1)."""
    from .pairenum import cross_graph_swap_check, box1_swap_density_check

    ok1, d1 = cross_graph_swap_check()
    ok2, d2 = box1_swap_density_check()
    return ok1 and ok2, f"cross graph: {d1}; box(1): {d2}"


def check_fkg_weights():
    """The four-point inequality for the pair weights on a single edge."""
    from .model import edge_t2, edge_lambda

    t = math.sqrt(edge_t2(T_C))
    lam = edge_lambda(T_C)

    def W(a, b):
        if b == 0:
            return lam * t
        return lam if a == b else 0.0

    worst = math.inf
    for se, ne in itertools.product((1, 0, -1), repeat=2):
        lhs = W(1, max(se, ne)) * W(-1, min(se, ne))
        rhs = W(1, se) * W(-1, ne)
        worst = min(worst, lhs - rhs)
    return worst >= -TOL, f"min(LHS - RHS) = {worst:.2e}"


def check_fkg_events(region, n_fields=2):
    """FKG for the pair order: P(A and B) >= P(A) P(B) for two increasing
    pre-disagreement events."""
    interior = [tuple(p) for p in region.interior.tolist()]
    u = interior[0]
    v = interior[-1]
    worst = math.inf
    for k in range(n_fields):
        fld = sample_field(region, Seed(900 + k))
        pair = PairSpec(GibbsSpec(region, T_C, "+", fld, 0.7),
                        GibbsSpec(region, T_C, "-", fld, 0.7))
        pa = oracle.exact_pair_event_prob(pair, EventSpec("origin_in_D_boundary", (u,)))
        pb = oracle.exact_pair_event_prob(pair, EventSpec("origin_in_D_boundary", (v,)))
        pab = oracle.exact_pair_both_to_boundary(pair, u, v)
        worst = min(worst, pab - pa * pb)
    return worst >= -TOL, f"min(P(AB) - P(A)P(B)) = {worst:.2e}"


def check_cbc(region, n_pairs=200, exhaustive=False):
    """CBC: the +/- pair dominates any xi+/xi- pair, which dominates -/+,
    for the increasing event {o in D_boundary}."""
    fld = sample_field(region, Seed(13))
    eps = 0.8
    top = oracle.exact_pair_event_prob(
        PairSpec(GibbsSpec(region, T_C, "+", fld, eps), GibbsSpec(region, T_C, "-", fld, eps)),
        EventSpec("origin_in_D_boundary", ((0, 0),)))
    bot = oracle.exact_pair_event_prob(
        PairSpec(GibbsSpec(region, T_C, "-", fld, eps), GibbsSpec(region, T_C, "+", fld, eps)),
        EventSpec("origin_in_D_boundary", ((0, 0),)))
    nb = len(region.boundary)
    worst = -math.inf
    if exhaustive and nb <= 8:
        combos = itertools.product(range(1 << nb), repeat=2)
    else:
        rng = np.random.default_rng(17)
        combos = ((int(rng.integers(1 << nb)), int(rng.integers(1 << nb)))
                  for _ in range(n_pairs))
    count = 0
    for cp, cm in combos:
        xp = np.array([1 if (cp >> i) & 1 else -1 for i in range(nb)], dtype=np.int8)
        xm = np.array([1 if (cm >> i) & 1 else -1 for i in range(nb)], dtype=np.int8)
        mid = oracle.exact_pair_event_prob(
            PairSpec(GibbsSpec(region, T_C, xp, fld, eps), GibbsSpec(region, T_C, xm, fld, eps)),
            EventSpec("origin_in_D_boundary", ((0, 0),)))
        worst = max(worst, mid - top, bot - mid)
        count += 1
    return worst <= TOL, f"max CBC defect over {count} bc pairs = {worst:.2e}"


def check_cbc_closed_form():
    """CBC over ALL 2^8 x 2^8 boundary pairs on box(1), via the independent
    single-site closed form P = P+(s_o=1) P-(s_o=-1) (1 - (1-q)^k) with k the
    number of o-adjacent boundary sites carrying a (+,-) pair; cross-checked
    against the DP oracle on a sample of pairs."""
    region = build_region("box", 1)
    fld = sample_field(region, Seed(13))
    eps = 0.8
    T = T_C
    beta = 1.0 / T
    h = eps * fld.values[0]
    p = GibbsSpec(region, T, "+").p
    q = 1.0 - (1.0 - p) ** 2
    bpts = region.boundary.tolist()
    adj = np.array([max(abs(x), abs(y)) == 1 and abs(x) + abs(y) == 1 for x, y in bpts])
    nb = len(bpts)
    xi_all = np.array([[1 if (c >> i) & 1 else -1 for i in range(nb)]
                       for c in range(1 << nb)], dtype=np.int8)
    field_sum = (xi_all * adj[None, :]).sum(axis=1)   # only o-adjacent sites couple

    def p_plus(xisum):
        return 1.0 / (1.0 + np.exp(-2.0 * beta * (xisum + h)))

    pp = p_plus(field_sum.astype(float))          # P(s_o = 1 | xi)
    probs = np.zeros((1 << nb, 1 << nb))
    adj_idx = np.nonzero(adj)[0]
    # k(xi+, xi-) = # adjacent boundary sites with (xi+, xi-) = (+1, -1)
    plus_bits = (xi_all[:, adj_idx] == 1)
    minus_bits = (xi_all[:, adj_idx] == -1)
    worst = -math.inf
    top_idx = (1 << nb) - 1
    vals = np.zeros((1 << nb, 1 << nb))
    for cp in range(1 << nb):
        k = (plus_bits[cp][None, :] & minus_bits).sum(axis=1)
        vals[cp] = pp[cp] * (1.0 - pp) * (1.0 - (1.0 - q) ** k)
    top = vals[top_idx, 0]
    bot = vals[0, top_idx]
    worst = float(max((vals - top).max(), (bot - vals).max()))
    # cross-check the closed form against the DP oracle
    rng = np.random.default_rng(23)
    crossdiff = 0.0
    for _ in range(40):
        cp, cm = int(rng.integers(1 << nb)), int(rng.integers(1 << nb))
        pair = PairSpec(GibbsSpec(region, T, xi_all[cp], fld, eps),
                        GibbsSpec(region, T, xi_all[cm], fld, eps))
        dp = oracle.exact_pair_event_prob(pair, EventSpec("origin_in_D_boundary", ((0, 0),)))
        crossdiff = max(crossdiff, abs(dp - vals[cp, cm]))
    ok = worst <= TOL and crossdiff <= TOL
    return ok, (f"all {1 << (2 * nb)} bc pairs, max CBC defect = {worst:.2e}, "
                f"closed form vs DP max diff = {crossdiff:.2e}")


def check_duality():
    """Per-configuration planar duality: vertical primal crossing iff the
    horizontal dual crossing fails; exhaustive on tiny rectangles, sampled on
    a larger one.  Plus the dual-edge involution."""
    for (x0, x1, y0, y1) in ((0, 1, 0, 1), (0, 2, 0, 1), (0, 2, 0, 2)):
        edges = rect_edge_list(x0, x1, y0, y1)
        for mask in range(1 << len(edges)):
            open_set = {e for k, e in enumerate(edges) if (mask >> k) & 1}
            v = vertical_crossing(x0, x1, y0, y1, open_set)
            hd = dual_horizontal_crossing(x0, x1, y0, y1, open_set)
            if v == hd:
                return False, f"duality broken on rect {(x0, x1, y0, y1)} mask {mask}"
    rng = np.random.default_rng(5)
    edges = rect_edge_list(-3, 3, -2, 2)
    for _ in range(500):
        open_set = {e for e in edges if rng.random() < 0.5}
        v = vertical_crossing(-3, 3, -2, 2, open_set)
        hd = dual_horizontal_crossing(-3, 3, -2, 2, open_set)
        if v == hd:
            return False, "duality broken on sampled configuration"
    for e in rect_edge_list(-1, 1, -1, 1):
        d = dual_site(e)
        back = dual_site(d)
        if not np.allclose(np.sort(back, axis=0), np.sort(np.asarray(e, float), axis=0)):
            return False, f"dual involution broken at {e}"
    return True, "exhaustive on 3 rects, 500 sampled configs, involution"


FAST_CHECKS = [
    ("lemma24_coupling_box1", lambda: check_coupling(build_region("box", 1))),
    ("prop25_representation_box1", lambda: check_disagreement_representation(build_region("box", 1))),
    ("swap_invariance", check_swap_invariance),
    ("fkg_pair_weights", check_fkg_weights),
    ("fkg_pair_events_annulus13", lambda: check_fkg_events(build_region("annulus", (1, 3)))),
    ("cbc_box1_exhaustive", lambda: check_cbc_closed_form()),
    ("surface_tension_annulus13", lambda: check_surface_tension(build_region("annulus", (1, 3)))),
    ("chaos_telescoping_box1", lambda: check_chaos_telescoping(build_region("box", 1))),
    ("influence_expansion_box1", lambda: check_influence_expansion(build_region("box", 1))),
    ("lemma43_annulus13", lambda: check_lemma43(build_region("annulus", (1, 3)))),
    ("lemma45_bk_annulus13", lambda: check_bk(build_region("annulus", (1, 3)))),
    ("kernel_stationarity_box1", lambda: check_kernels(build_region("box", 1))),
    ("planar_duality", check_duality),
]

FULL_CHECKS = FAST_CHECKS + [
    ("lemma24_coupling_box2", lambda: check_coupling(build_region("box", 2), n_fields=2)),
    ("prop25_representation_box2", lambda: check_disagreement_representation(
        build_region("box", 2), n_fields=2, eps_list=(0.0, 1.0))),
    ("even_cluster_box2", lambda: check_even_cluster(build_region("box", 2))),
    ("chaos_telescoping_box2", lambda: check_chaos_telescoping(build_region("box", 2))),
    ("influence_expansion_box2", lambda: check_influence_expansion(build_region("box", 2), n_fields=2)),
    ("surface_tension_annulus24", lambda: check_surface_tension(
        build_region("annulus", (2, 4)), temps=(T_C,))),
    ("lemma45_bk_annulus24", lambda: check_bk(build_region("annulus", (2, 4)), n_random_bc=10)),
    ("fkg_pair_events_box2", lambda: check_fkg_events(build_region("box", 2), n_fields=1)),
    ("cbc_box1_dp_crosscheck", lambda: check_cbc(build_region("box", 1), n_pairs=60)),
    ("kernel_stationarity_box2_hb", lambda: check_kernels(build_region("box", 2))),
]


def run_suite(level="fast"):
    checks = FAST_CHECKS if level == "fast" else FULL_CHECKS
    results = []
    for name, fn in checks:
        t0 = time.time()
        try:
            passed, detail = fn()
        except Exception as exc:            # a crashed check is a failed check
            passed, detail = False, f"exception: {exc!r}"
        results.append(CheckResult(name, bool(passed), detail, time.time() - t0))
    return results
