"""Monte Carlo estimation pipelines over quenched disorder replicas.

Every estimator draws one field per replica from a counter-based seed, runs
coupled plus/minus chains, and reduces replica results in replica order, so
results are byte-stable under any worker count.  Standard errors are batch
means within replicas combined with the across-replica spread.
"""

from __future__ import annotations

import hashlib
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy import stats

from . import disagreement as dis
from .disorder import Field, Seed, sample_field, zero_field
from .grids import region_grid
from .lattice import Region, build_region
from .model import GibbsSpec, SpecError, T_C
from .oracle import EventSpec
from .sampler import (ChainState, UpdateSchedule, WiredAnnulusChain,
                      default_schedule, run_coupled_chains, wolff_update)


@dataclass(frozen=True)
class Estimate:
    """A Monte Carlo value with provenance."""

    value: float
    se: float
    n_samples: int
    replicas: int
    seed: int
    fingerprint: str

    def __post_init__(self):
        if self.se < 0:
            raise ValueError("standard error must be >= 0")


@dataclass(frozen=True)
class ReplicaEstimate:
    replica: int
    value: float
    se: float
    n_samples: int


def production_schedule(N, snapshots=800) -> UpdateSchedule:
    """Measurement schedule used by the estimators: Wolff plus one SW sweep
    per snapshot (the SW sweep decorrelates the boundary-anchored structure,
    which pure single-cluster updates relax slowly)."""
    return UpdateSchedule(burn_in_wolff=10 * N, burn_in_heatbath=5,
                          burn_in_sw=60, measurement_sweeps=snapshots,
                          thinning=1, sw_per_snapshot=1)


def batch_means(samples, n_batches: int = 32):
    """(mean, se) by non-overlapping batch means."""
    x = np.asarray(samples, dtype=np.float64)
    n = len(x)
    if n == 0:
        raise ValueError("no samples")
    n_batches = max(2, min(n_batches, n))
    m = n // n_batches * n_batches
    b = x[:m].reshape(n_batches, -1).mean(axis=1)
    se = float(b.std(ddof=1) / math.sqrt(n_batches)) if n_batches > 1 else 0.0
    return float(x.mean()), se


def _fingerprint(*parts) -> str:
    return hashlib.sha256(repr(parts).encode()).hexdigest()[:16]


def _combine_replicas(per_replica):
    """Annealed value and error from per-replica means (disorder variance plus
    chain noise both live in the spread of replica means)."""
    vals = np.array([r.value for r in per_replica])
    mean = float(vals.mean())
    if len(vals) > 1:
        se = float(vals.std(ddof=1) / math.sqrt(len(vals)))
    else:
        se = per_replica[0].se
    return mean, se


# ---------------------------------------------------------------------------
# Boundary influence


def _region_of(params):
    kind, p, center = params
    return build_region(kind, p if np.iterable(p) else p, center)


def _replica_boundary_influence(args):
    (region_params, T, eps, master, replica, sched, v) = args
    region = _region_of(region_params)
    seed = Seed(master, replica)
    field = sample_field(region, seed) if eps > 0 else zero_field(region)
    spec_p = GibbsSpec(region, T, "+", field, eps)
    spec_m = GibbsSpec(region, T, "-", field, eps)
    schedule = UpdateSchedule.from_tuple(sched)
    hits = []
    ev = EventSpec("origin_in_D_boundary", (tuple(v),))
    for snap in run_coupled_chains(spec_p, spec_m, schedule, seed.derived("pair", replica)):
        ok, _ = dis.detect_event(snap, ev)
        hits.append(1.0 if ok else 0.0)
    mean, se = batch_means(hits)
    return ReplicaEstimate(replica=replica, value=mean, se=se, n_samples=len(hits))


def estimate_boundary_influence(T, N, eps, replicas, schedule=None, seed=0,
                                v=(0, 0), threads=1):
    """Annealed boundary influence m(T, N, eps) via the disagreement
    representation, plus the per-replica quenched list."""
    if replicas < 1:
        raise SpecError("need at least one replica")
    region = build_region("box", N)
    if schedule is None:
        schedule = production_schedule(N)
    sched = schedule.to_tuple()
    jobs = [(("box", (N,), (0, 0)), T, eps, seed, r, sched, tuple(v))
            for r in range(replicas)]
    per_replica = _run_jobs(_replica_boundary_influence, jobs, threads)
    mean, se = _combine_replicas(per_replica)
    est = Estimate(
        value=mean, se=se,
        n_samples=sum(r.n_samples for r in per_replica),
        replicas=replicas, seed=seed,
        fingerprint=_fingerprint("m", T, N, eps, replicas, sched, seed),
    )
    return est, per_replica


def _run_jobs(fn, jobs, threads):
    if threads <= 1 or len(jobs) <= 1:
        results = [fn(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(fn, jobs, chunksize=1))
    return sorted(results, key=lambda r: r.replica)


def quenched_quantiles(per_replica, qs=(5, 25, 50, 75, 95)):
    vals = np.array([r.value for r in per_replica])
    return {q: float(np.percentile(vals, q)) for q in qs}


# ---------------------------------------------------------------------------
# Event probabilities under coupled chains


def _replica_event(args):
    (region_params, T, eps, master, replica, sched, ev_kind, ev_params,
     bc_plus, bc_minus) = args
    region = _region_of(region_params)
    seed = Seed(master, replica)
    field = sample_field(region, seed) if eps > 0 else zero_field(region)
    bp = tuple(bc_plus) if isinstance(bc_plus, (tuple, list)) else bc_plus
    bm = tuple(bc_minus) if isinstance(bc_minus, (tuple, list)) else bc_minus
    spec_p = GibbsSpec(region, T, bp, field, eps)
    spec_m = GibbsSpec(region, T, bm, field, eps)
    schedule = UpdateSchedule.from_tuple(sched)
    ev = EventSpec(ev_kind, tuple(ev_params))
    hits = []
    for snap in run_coupled_chains(spec_p, spec_m, schedule, seed.derived("event", replica)):
        ok, _ = dis.detect_event(snap, ev)
        hits.append(1.0 if ok else 0.0)
    mean, se = batch_means(hits)
    return ReplicaEstimate(replica=replica, value=mean, se=se, n_samples=len(hits))


def estimate_event_prob(event: EventSpec, region: Region, T, eps, replicas,
                        schedule=None, seed=0, bc_plus="+", bc_minus="-",
                        threads=1) -> Estimate:
    """Probability of a pre-disagreement event under the coupled-chain product
    measure with the stated boundaries."""
    if schedule is None:
        schedule = production_schedule(max(region.params))
    sched = schedule.to_tuple()
    params = (region.kind, region.params, region.center)
    jobs = [(params, T, eps, seed, r, sched, event.kind, event.params, bc_plus, bc_minus)
            for r in range(replicas)]
    per_replica = _run_jobs(_replica_event, jobs, threads)
    mean, se = _combine_replicas(per_replica)
    return Estimate(
        value=mean, se=se,
        n_samples=sum(r.n_samples for r in per_replica),
        replicas=replicas, seed=seed,
        fingerprint=_fingerprint("event", event.kind, event.params, params, T,
                                 eps, replicas, sched, seed, bc_plus, bc_minus),
    )


# ---------------------------------------------------------------------------
# Good boxes


@dataclass(frozen=True)
class GoodBoxThresholds:
    around_min: float = 0.05     # lower bound on the worst-case circuit probability
    fraction_min: float = 0.5    # fraction of tested sites that stay near zero-field


@dataclass(frozen=True)
class GoodBoxVerdict:
    verdict: str                 # good | bad | undetermined
    around_worst: float          # +/- extreme estimate (thresholded)
    around_se: float
    around_anti: float           # -/+ extreme estimate (reported only: its
    fraction: float              # universal floor is below desk resolution)
    tested_xi: str
    updates_used: int


def classify_good_box(u, M, field: Field, eps, thresholds=GoodBoxThresholds(),
                      budget=400_000, seed=0, snapshots=400, n_sites=6) -> GoodBoxVerdict:
    """Estimate whether the field restricted to Lambda_{5M}(u) makes the M-box
    at u good: (i) pre-disagreement circuits in Lambda_{M,2M}(u) are likely
    under both extreme boundary pairs, (ii) at least half the sampled sites
    keep their single-site disagreement probability within a factor 2 of its
    zero-field value.  Never silently good: budget exhaustion -> undetermined.
    """
    u = (int(u[0]), int(u[1]))
    big = build_region("box", 5 * M, center=u)
    sub_field = restrict_field(field, big)
    used = 0

    def run_pair(region, fld, e, bc_p, bc_m, ev, tag, n_snap):
        nonlocal used
        schedule = UpdateSchedule(burn_in_wolff=10 * max(region.params),
                                  burn_in_heatbath=10, burn_in_sw=30,
                                  measurement_sweeps=n_snap, thinning=1,
                                  sw_per_snapshot=1)
        cost = 2 * (schedule.burn_in_wolff + schedule.burn_in_sw
                    + 2 * schedule.measurement_sweeps)
        if used + cost > budget:
            return None
        used += cost
        spec_p = GibbsSpec(region, region_T, bc_p, fld, e)
        spec_m = GibbsSpec(region, region_T, bc_m, fld, e)
        hits = []
        for snap in run_coupled_chains(spec_p, spec_m, schedule,
                                       Seed(seed, purpose=tag)):
            ok, _ = dis.detect_event(snap, ev)
            hits.append(1.0 if ok else 0.0)
        return batch_means(hits)

    region_T = T_C
    ev_around = EventSpec("around", (u, M))
    estimates = {}
    for tag, (bp, bm) in (("gb-pm", ("+", "-")), ("gb-mp", ("-", "+"))):
        r = run_pair(big, sub_field, eps, bp, bm, ev_around, tag, snapshots)
        if r is None:
            return GoodBoxVerdict("undetermined", math.nan, math.nan, math.nan,
                                  math.nan, "extremes (anti reported)", used)
        estimates[tag] = r
    worst = estimates["gb-pm"]          # thresholded extreme
    around_anti = estimates["gb-mp"][0]
    around_ok = worst[0] >= thresholds.around_min

    rng = Seed(seed, purpose="gb-sites").generator()
    interior = build_region("box", M, center=u).vertices
    picks = interior[rng.choice(len(interior), size=min(n_sites, len(interior)),
                                replace=False)]
    good_sites = 0
    tested = 0
    for x in picks.tolist():
        sub = build_region("box", 4 * M, center=(int(x[0]), int(x[1])))
        f_sub = restrict_field(field, sub)
        ev = EventSpec("origin_in_D_boundary", ((int(x[0]), int(x[1])),))
        with_f = run_pair(sub, f_sub, eps, "+", "-", ev, f"gb-x{x}", snapshots // 2)
        no_f = run_pair(sub, zero_field(sub), 0.0, "+", "-", ev, f"gb-x0{x}", snapshots // 2)
        if with_f is None or no_f is None:
            return GoodBoxVerdict("undetermined", worst[0], worst[1], around_anti,
                                  math.nan, "extremes (anti reported)", used)
        tested += 1
        if with_f[0] >= 0.5 * no_f[0]:
            good_sites += 1
    fraction = good_sites / tested if tested else 0.0
    verdict = "good" if (around_ok and fraction >= thresholds.fraction_min) else "bad"
    return GoodBoxVerdict(verdict, worst[0], worst[1], around_anti, fraction,
                          "extremes (anti reported)", used)


def restrict_field(field: Field, subregion: Region) -> Field:
    """Field values of a parent region restricted to a subregion's interior."""
    idx = field.region.interior_index()
    vals = np.zeros(subregion.n_interior)
    for k, (x, y) in enumerate(subregion.interior.tolist()):
        if (x, y) not in idx:
            raise SpecError(f"subregion interior site ({x},{y}) outside parent interior")
        vals[k] = field.values[idx[(x, y)]]
    return Field(region=subregion, values=vals, seed=None)


# ---------------------------------------------------------------------------
# Power-law fit and the scaling table


def fit_power_law(rows):
    """Weighted least squares of log m on log N; returns (slope, intercept,
    (ci_lo, ci_hi)) at 95% for the slope."""
    rows = list(rows)
    if len(rows) < 3:
        raise SpecError("power-law fit needs at least 3 points")
    ns = np.array([r[0] for r in rows], dtype=float)
    ms = np.array([r[1] for r in rows], dtype=float)
    ses = np.array([r[2] for r in rows], dtype=float)
    if np.any(np.diff(ns) <= 0):
        raise SpecError("N values must be strictly increasing")
    if np.any(ms <= 0):
        raise SpecError("nonpositive estimates cannot be log-fitted")
    x = np.log(ns)
    y = np.log(ms)
    sy = np.where(ses > 0, ses / ms, 1e-12)
    w = 1.0 / sy ** 2
    sw = w.sum()
    xb = (w * x).sum() / sw
    yb = (w * y).sum() / sw
    sxx = (w * (x - xb) ** 2).sum()
    slope = (w * (x - xb) * (y - yb)).sum() / sxx
    intercept = yb - slope * xb
    resid = y - (intercept + slope * x)
    dof = len(rows) - 2
    chi2 = float((w * resid ** 2).sum())
    scale = max(1.0, chi2 / dof)       # inflate when scatter exceeds quoted errors
    slope_se = math.sqrt(scale / sxx)
    tq = stats.t.ppf(0.975, dof)
    return slope, intercept, (slope - tq * slope_se, slope + tq * slope_se)


@dataclass(frozen=True)
class ScalingRow:
    T: float
    N: int
    eps: float
    m: float
    se: float

    @property
    def x(self) -> float:
        return self.eps ** (8.0 / 7.0) * self.N

    @property
    def y(self) -> float:
        return self.m * self.N ** 0.125


def scaling_table(T, grid, replicas, seed=0, schedule_for=None, threads=1):
    """Rows of (T, N, eps, m, se) with collapse coordinates, sorted by (N, eps)."""
    if not grid:
        raise SpecError("empty grid")
    rows = []
    for (N, eps) in sorted(grid):
        schedule = schedule_for(N) if schedule_for else None
        est, _ = estimate_boundary_influence(T, N, eps, replicas,
                                             schedule=schedule,
                                             seed=seed, threads=threads)
        rows.append(ScalingRow(T=T, N=N, eps=eps, m=est.value, se=est.se))
    return rows


def scaling_csv(rows) -> str:
    out = ["T,N,eps,m,se,x,y"]
    for r in sorted(rows, key=lambda r: (r.N, r.eps)):
        out.append(f"{r.T:.17g},{r.N},{r.eps:.17g},{r.m:.17g},{r.se:.17g},"
                   f"{r.x:.17g},{r.y:.17g}")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# Correlation length search


@dataclass(frozen=True)
class CorrelationLengthResult:
    n_lo: int
    n_hi: int | None            # None: open bracket (search cap reached)
    mode: str
    evaluations: tuple

    @property
    def open_ended(self) -> bool:
        return self.n_hi is None


def find_correlation_length(T, eps, seed=0, mode="psi_star", target=None,
                            replicas=24, n_max=256, threads=1,
                            snapshots=600, schedule_builder=None,
                            baseline_replicas=None):
    """Doubling-then-bisection search for the smallest N with m(N) at or below
    the target (psi) or below half the zero-field value (psi_star).

    Decisions honor the 2-s.e. separation rule: a scale counts as below only
    when m is under the target by twice the combined error, above only when it
    exceeds it by the same margin; ambiguous scales leave the bracket ends
    where they are.
    """
    if mode == "psi" and not (target and target > 0):
        raise SpecError("psi mode needs a positive target")
    if schedule_builder is None:
        schedule_builder = lambda N: production_schedule(N, snapshots=snapshots)

    cache = {}
    evals = []

    def m_hat(N, e):
        key = (N, e)
        if key not in cache:
            reps = replicas if e > 0 else (baseline_replicas or max(4, replicas // 3))
            est, _ = estimate_boundary_influence(T, N, e, reps,
                                                 schedule=schedule_builder(N),
                                                 seed=seed, threads=threads)
            cache[key] = est
            evals.append((N, e, est.value, est.se))
        return cache[key]

    def status(N):
        est = m_hat(N, eps)
        if mode == "psi":
            goal, dgoal = target, 0.0
        else:
            base = m_hat(N, 0.0)
            goal, dgoal = 0.5 * base.value, 0.5 * base.se
        err = 2.0 * math.hypot(est.se, dgoal)
        if est.value <= goal - err:
            return "below"
        if est.value > goal + err:
            return "above"
        return "ambiguous"

    n_lo, n_hi = 1, None
    n = 2
    while n <= n_max:
        s = status(n)
        if s == "below":
            n_hi = n
            break
        if s == "above":
            n_lo = n
        n *= 2
    if n_hi is None:
        return CorrelationLengthResult(n_lo=n_lo, n_hi=None, mode=mode,
                                       evaluations=tuple(evals))
    while n_hi - n_lo > 1:
        mid = (n_lo + n_hi) // 2
        s = status(mid)
        if s == "below":
            n_hi = mid
        elif s == "above":
            n_lo = mid
        else:
            break
    return CorrelationLengthResult(n_lo=n_lo, n_hi=n_hi, mode=mode,
                                   evaluations=tuple(evals))


# ---------------------------------------------------------------------------
# Disagreement counts


def estimate_disagreement_count(inner: Region, outer: Region, field, eps, T=T_C,
                                schedule=None, seed=0) -> Estimate:
    """<|Gamma_1 cap D_boundary|> under the +/- product measure on Gamma_2."""
    inner_set = set(map(tuple, inner.vertices.tolist()))
    outer_set = set(map(tuple, outer.vertices.tolist()))
    if not inner_set < outer_set:
        raise SpecError("Gamma_1 must be strictly inside Gamma_2")
    if schedule is None:
        schedule = default_schedule(outer)
    spec_p = GibbsSpec(outer, T, "+", field, eps)
    spec_m = GibbsSpec(outer, T, "-", field, eps)
    g = region_grid(outer)
    rows, cols = g.vertex_dcells(np.array(sorted(inner_set)))
    counts = []
    for snap in run_coupled_chains(spec_p, spec_m, schedule, Seed(seed, purpose="dcount")):
        ds = dis.pre_disagreements(snap)
        anchored = dis.boundary_anchored(ds)
        counts.append(float(np.sum(anchored[rows, cols])))
    mean, se = batch_means(counts)
    return Estimate(value=mean, se=se, n_samples=len(counts), replicas=1,
                    seed=seed, fingerprint=_fingerprint("dcount", outer.params, eps, seed))


# ---------------------------------------------------------------------------
# Supercritical FK good boxes


def _strip_crossed(g, lab, x0, x1, y0, y1, vertical):
    """Open-cluster crossing of [x0,x1]x[y0,y1] between its short sides."""
    h, w = lab.shape
    xs = np.arange(w) + g.dx0
    ys = np.arange(h) + g.dy0
    inside = ((xs[None, :] >= 2 * x0) & (xs[None, :] <= 2 * x1)
              & (ys[:, None] >= 2 * y0) & (ys[:, None] <= 2 * y1))
    lab2, n2 = _relabel(lab, inside)
    if vertical:
        side_a = inside & (ys[:, None] == 2 * y0)
        side_b = inside & (ys[:, None] == 2 * y1)
    else:
        side_a = inside & (xs[None, :] == 2 * x0)
        side_b = inside & (xs[None, :] == 2 * x1)
    la = np.unique(lab2[side_a & (lab2 > 0)])
    lb = np.unique(lab2[side_b & (lab2 > 0)])
    return len(np.intersect1d(la, lb)) > 0


def _relabel(mask_lab, inside):
    from scipy import ndimage
    from .grids import FOUR_CONN

    return ndimage.label((mask_lab > 0) & inside, structure=FOUR_CONN)


def fk_good_box_frequency(p, q, xi="wired", replicas=64, seed=0, sweeps=40) -> Estimate:
    """Frequency of the supercritical FK good box: open crossings of all four
    q x 3q side strips of Lambda_{1.5q}, sampled under phi_{p, Lambda_{2q}}^xi.

    p > p_c is required; the Ising temperature is T = -2/log(1-p)."""
    from .model import fk_p

    p_c = fk_p(T_C)
    if not (p_c < p < 1):
        raise SpecError(f"need p in (p_c, 1), p_c = {p_c:.6f}")
    if q % 2:
        raise SpecError("q must be even (strips at half-integer multiples)")
    T = -2.0 / math.log1p(-p)
    region = build_region("box", 2 * q)
    g = region_grid(region)
    hits = []
    for r in range(replicas):
        chain = _FkBoxChain(region, T, Seed(seed, r, "fkgood"), xi)
        for _ in range(sweeps):
            chain.update()
        bonds = chain.bond_sample()
        lab = _bond_label(g, bonds, include_boundary=(xi == "wired"))
        s = q // 2
        ok = (
            _strip_crossed(g, lab, s, 3 * s, -3 * s, 3 * s, vertical=True)
            and _strip_crossed(g, lab, -3 * s, -s, -3 * s, 3 * s, vertical=True)
            and _strip_crossed(g, lab, -3 * s, 3 * s, s, 3 * s, vertical=False)
            and _strip_crossed(g, lab, -3 * s, 3 * s, -3 * s, -s, vertical=False)
        )
        hits.append(1.0 if ok else 0.0)
    mean = float(np.mean(hits))
    se = float(np.std(hits, ddof=1) / math.sqrt(len(hits))) if len(hits) > 1 else 0.0
    return Estimate(value=mean, se=se, n_samples=len(hits), replicas=replicas,
                    seed=seed, fingerprint=_fingerprint("fkgood", p, q, xi, seed))


def _bond_label(g, bonds, include_boundary):
    from scipy import ndimage
    from .grids import FOUR_CONN

    dd = np.zeros(g.dshape, dtype=bool)
    dd[g.vcell_mask] = True
    hr, hc, hopen = bonds["h"]
    vr, vc, vopen = bonds["v"]
    dd[hr[hopen], hc[hopen]] = True
    dd[vr[vopen], vc[vopen]] = True
    lab, _ = ndimage.label(dd, structure=FOUR_CONN)
    return lab


class _FkBoxChain:
    """Ising chain on a box with wired (+ ring) or free boundary, zero field,
    used to sample FK configurations via conditional bond resampling."""

    def __init__(self, region, T, seed: Seed, xi):
        if xi not in ("wired", "free"):
            raise SpecError("xi must be wired or free")
        self.xi = xi
        self.T = T
        self.region = region
        self.grid = region_grid(region)
        self.rng = seed.generator()
        self.beta = 1.0 / T
        self.p = 1.0 - math.exp(-2.0 / T)
        g = self.grid
        self.dynamic_mask = g.vertex_mask if xi == "free" else g.interior_mask
        self.spins = np.where(g.vertex_mask, np.int8(1), np.int8(0))
        ys = np.arange(g.vshape[0]) + g.vy0
        xs = np.arange(g.vshape[1]) + g.vx0
        parity = (ys[:, None] + xs[None, :]) & 1
        self._color = [self.dynamic_mask & (parity == c) for c in (0, 1)]

    def update(self):
        s = self.spins
        for color_mask in self._color:
            nb = np.zeros(self.grid.vshape)
            nb[1:, :] += s[:-1, :]
            nb[:-1, :] += s[1:, :]
            nb[:, 1:] += s[:, :-1]
            nb[:, :-1] += s[:, 1:]
            p_plus = 1.0 / (1.0 + np.exp(-2.0 * self.beta * nb))
            u = self.rng.random(self.grid.vshape)
            s[color_mask] = np.where(u[color_mask] < p_plus[color_mask], 1, -1)

    def bond_sample(self):
        g = self.grid
        s = self.spins
        vmask = g.vertex_mask
        hpair = vmask[:, :-1] & vmask[:, 1:]
        vpair = vmask[:-1, :] & vmask[1:, :]
        open_h = hpair & (s[:, :-1] == s[:, 1:]) & (self.rng.random(hpair.shape) < self.p)
        open_v = vpair & (s[:-1, :] == s[1:, :]) & (self.rng.random(vpair.shape) < self.p)
        rows_h, cols_h = np.nonzero(hpair)
        rows_v, cols_v = np.nonzero(vpair)
        return {
            "h": (2 * (rows_h + g.vy0) - g.dy0, 2 * (cols_h + g.vx0) + 1 - g.dx0,
                  open_h[rows_h, cols_h]),
            "v": (2 * (rows_v + g.vy0) + 1 - g.dy0, 2 * (cols_v + g.vx0) - g.dx0,
                  open_v[rows_v, cols_v]),
        }


def estimate_wired_wired_connection(region, T, sweeps=4000, burn=200, seed=0) -> Estimate:
    """phi^{w,w}(inner <-> outer) on an annulus via <s_in s_out>."""
    chain = WiredAnnulusChain(region, T, Seed(seed, purpose="ww"))
    for _ in range(burn):
        chain.sweep()
    samples = []
    for _ in range(sweeps):
        chain.sweep()
        samples.append(chain.correlation_sample())
    mean, se = batch_means(samples)
    return Estimate(value=mean, se=se, n_samples=len(samples), replicas=1,
                    seed=seed, fingerprint=_fingerprint("ww", region.params, T, seed))


# ---------------------------------------------------------------------------
# Autocorrelation diagnostics


def integrated_autocorrelation(series, window_factor=5.0):
    """Integrated autocorrelation time with a self-consistent window."""
    x = np.asarray(series, dtype=np.float64)
    x = x - x.mean()
    n = len(x)
    if n < 16 or np.allclose(x, 0.0):
        return 1.0
    acf = np.correlate(x, x, "full")[n - 1:] / np.arange(n, 0, -1)
    if acf[0] <= 0:
        return 1.0
    acf /= acf[0]
    tau = 1.0
    for w in range(1, n // 2):
        tau = 1.0 + 2.0 * float(np.sum(acf[1:w + 1]))
        if w >= window_factor * tau:
            break
    return max(tau, 1e-6)


def wolff_vs_heatbath_autocorrelation(N=32, seed=0, n_steps=3000):
    """Autocorrelation times of |m| at T_c on the free-boundary box, in units
    of equivalent lattice sweeps (one Wolff update counts as its mean cluster
    fraction of a sweep).  The ratio is reported, not asserted."""
    region = build_region("box", N)
    out = {}

    chain = _FreeBoxWolff(region, T_C, Seed(seed, purpose="act-wolff"))
    for _ in range(300):
        chain.update()
    series, sizes = [], []
    for _ in range(n_steps):
        sizes.append(chain.update())
        series.append(abs(chain.magnetization()))
    frac = float(np.mean(sizes)) / chain.n_dynamic
    out["wolff_updates"] = integrated_autocorrelation(series)
    out["wolff"] = out["wolff_updates"] * frac        # in sweep equivalents
    out["mean_cluster_fraction"] = frac

    hb = _FkBoxChain(region, T_C, Seed(seed, purpose="act-hb"), "free")
    for _ in range(300):
        hb.update()
    series = []
    interior = hb.grid.vertex_mask
    for _ in range(n_steps):
        hb.update()
        series.append(abs(float(hb.spins[interior].mean())))
    out["heat_bath"] = integrated_autocorrelation(series)
    out["ratio_heatbath_over_wolff"] = out["heat_bath"] / out["wolff"]
    return out


class _FreeBoxWolff:
    """Classic Wolff on the free-boundary zero-field box (every cluster
    flips), for the autocorrelation diagnostic."""

    def __init__(self, region, T, seed: Seed):
        from .sampler import _wolff_core

        self.grid = region_grid(region)
        g = self.grid
        self.rng = seed.generator()
        self.p = 1.0 - math.exp(-2.0 / T)
        self.spins = np.where(g.vertex_mask, np.int8(1), np.int8(0))
        self.dynamic = g.vertex_mask
        rows, cols = np.nonzero(self.dynamic)
        self._rows, self._cols = rows, cols
        self.n_dynamic = len(rows)
        n_cells = g.vshape[0] * g.vshape[1]
        self._buf_len = 5 * n_cells + 2
        self._stack = np.zeros(n_cells, dtype=np.int64)
        self._mark = np.zeros(g.vshape, dtype=np.bool_)
        self._pghost = np.zeros(g.vshape)
        self._gsign = np.zeros(g.vshape, dtype=np.int8)
        self._core = _wolff_core

    def update(self) -> int:
        k = int(self.rng.integers(self.n_dynamic))
        buf = self.rng.random(self._buf_len)
        size = self._core(self.spins, self.dynamic, self._pghost, self._gsign,
                          self.p, int(self._rows[k]), int(self._cols[k]), buf,
                          self._stack, self._mark)
        # no ghost, free boundary: flip unconditionally for the classic walk
        if buf[-1] >= 0.5:     # _wolff_core flipped with prob 1/2; flip the rest
            self.spins[self._mark] = -self.spins[self._mark]
        return int(size)

    def magnetization(self) -> float:
        return float(self.spins[self.dynamic].mean())


def fk_good_box_check(p, q, xi="wired", replicas=64, seed=0, sweeps=40) -> Estimate:
    """Alias with the operation's name; see fk_good_box_frequency."""
    return fk_good_box_frequency(p, q, xi=xi, replicas=replicas, seed=seed, sweeps=sweeps)
