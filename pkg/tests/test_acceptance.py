"""Acceptance suite: one test per criterion, each printing a PASS line with
its measured runtime.  Exact identities run at 1e-10 (1e-8 for the log
identity); sampled criteria decide at their stated error multiples.  Budgets
are sized for a single core; the stated wall-clock limits are asserted.

The tiny-annulus instances are the smallest well-posed ones (see the
decisions notes): the named annuli map to annulus(1,3) and annulus(2,4),
whose interiors are the four corner sites of the inner ring.
"""

import itertools
import json
import math
import time

import numpy as np
import pytest

from rfim2d import chaos, estimators as est, oracle, sampler, verify
from rfim2d.cli import main as cli_main
from rfim2d.disorder import Seed, sample_field, zero_field
from rfim2d.lattice import build_region
from rfim2d.model import GibbsSpec, T_C
from rfim2d.oracle import EventSpec, PairSpec
from rfim2d.sampler import UpdateSchedule

THREADS = 1
ANN_SMALL = build_region("annulus", (1, 3))
ANN_NEXT = build_region("annulus", (2, 4))


def _report(k, passed, detail, t0, limit):
    elapsed = time.time() - t0
    line = f"ACCEPTANCE {k}: {'PASS' if passed else 'FAIL'} ({elapsed:.1f}s / limit {limit:.0f}s) - {detail}"
    print(line)
    assert passed, line
    assert elapsed < limit, f"criterion {k} exceeded its runtime budget: {line}"


def test_criterion_01_coupling_identity():
    t0 = time.time()
    ok1, d1 = verify.check_coupling(build_region("box", 1), n_fields=5)
    ok2, d2 = verify.check_coupling(build_region("box", 2), n_fields=5)
    _report(1, ok1 and ok2, f"box(1): {d1}; box(2): {d2}", t0, 5.0)


def test_criterion_02_disagreement_representation():
    t0 = time.time()
    worst = 0.0
    for region in (build_region("box", 1), build_region("box", 2)):
        for k in range(5):
            fld = sample_field(region, Seed(1000 + k))
            for eps in (0.0, 0.3, 1.0, 3.0):
                pair = PairSpec(GibbsSpec(region, T_C, "+", fld, eps),
                                GibbsSpec(region, T_C, "-", fld, eps))
                lhs, rhs = oracle.exact_disagreement_representation(pair)
                worst = max(worst, abs(lhs - rhs))
    _report(2, worst <= 1e-10, f"max |LHS-RHS| = {worst:.2e} over 2 boxes x 5 fields x 4 eps",
            t0, 10.0)


def test_criterion_03_surface_tension_identity():
    t0 = time.time()
    ok, detail = verify.check_surface_tension(ANN_SMALL, n_fields=5,
                                              temps=(T_C, 0.7 * T_C))
    _report(3, ok, detail + " [annulus(1,3), Tc and 0.7 Tc]", t0, 30.0)


def test_criterion_04_chaos_telescoping():
    t0 = time.time()
    ok1, d1 = verify.check_chaos_telescoping(build_region("box", 1), n_fields=5)
    ok2, d2 = verify.check_chaos_telescoping(build_region("box", 2), n_fields=5)
    _report(4, ok1 and ok2, f"box(1): {d1}; box(2): {d2}", t0, 30.0)


def test_criterion_05_kernel_stationarity():
    t0 = time.time()
    worst = 0.0
    region = build_region("box", 1)
    for eps in (0.0, 1.0):
        for bc in ("+", "-"):
            fld = sample_field(region, Seed(5))
            spec = GibbsSpec(region, T_C, bc, fld, eps)
            pi = sampler.gibbs_vector(spec)
            for K in (sampler.exact_heat_bath_kernel(spec),
                      sampler.exact_wolff_kernel(spec)):
                worst = max(worst, float(np.max(np.abs(pi @ K - pi))))
    _report(5, worst <= 1e-10, f"max |pi K - pi| = {worst:.2e} (heat bath and Wolff, "
            "eps in {0,1}, +- boundaries)", t0, 5.0)


def test_criterion_06_critical_exponent():
    t0 = time.time()
    rows = []
    for N, reps, snaps in ((8, 32, 900), (16, 32, 900), (32, 24, 900), (64, 16, 700)):
        sched = est.production_schedule(N, snapshots=snaps)
        e, _ = est.estimate_boundary_influence(T_C, N, 0.0, replicas=reps,
                                               schedule=sched, seed=101,
                                               threads=THREADS)
        rows.append((N, e.value, e.se))
    slope, _, (lo, hi) = est.fit_power_law(rows)
    ok = (-0.125 - 0.03) <= lo and hi <= (-0.125 + 0.03) and lo <= -0.125 <= hi
    detail = (f"slope = {slope:.4f}, 95% ci = ({lo:.4f}, {hi:.4f}), window +-0.03 about -0.125; "
              + "; ".join(f"m({n})={m:.4f}+-{s:.4f}" for n, m, s in rows))
    _report(6, ok, detail, t0, 30 * 60.0)


def test_criterion_07_lemma43_bound():
    t0 = time.time()
    # exact part on the smallest well-posed annulus, complement algebra
    disc = oracle.exact_wired_wired_disconnection(ANN_SMALL, T_C)
    floor = (disc / (2.0 - disc)) ** 2
    exact_ok = True
    for k in range(5):
        fld = sample_field(ANN_SMALL, Seed(700 + k))
        d0 = oracle.exact_con_distribution(ANN_SMALL, fld, 1.0, T_C)[0]
        exact_ok &= (floor - d0) <= 1e-10 + 1e-6 * floor
    # sampled part on Lambda_{M,2M}, M in {4, 8}
    details = []
    sampled_ok = True
    for M, reps, snaps in ((4, 10, 500), (8, 6, 400)):
        ann = build_region("annulus", (M, 2 * M))
        sched = est.production_schedule(2 * M, snapshots=snaps)
        p_est = est.estimate_event_prob(EventSpec("con"), ann, T_C, 0.0,
                                        replicas=reps, schedule=sched, seed=41,
                                        bc_plus=("+", "+"), bc_minus=("-", "-"),
                                        threads=THREADS)
        phi_est = est.estimate_wired_wired_connection(ann, T_C, sweeps=6000,
                                                      burn=400, seed=42)
        phi, dphi = phi_est.value, phi_est.se
        bound = 1.0 - ((1.0 - phi) / (1.0 + phi)) ** 2
        dbound = 4.0 * (1.0 - phi) / (1.0 + phi) ** 3 * dphi
        margin = bound - p_est.value + 3.0 * math.hypot(p_est.se, dbound)
        sampled_ok &= margin >= 0.0
        details.append(f"M={M}: P(Con)={p_est.value:.4f}+-{p_est.se:.4f}, "
                       f"bound={bound:.4f}+-{dbound:.4f}")
    _report(7, exact_ok and sampled_ok,
            f"exact floor ok on annulus(1,3); " + "; ".join(details), t0, 10 * 60.0)


def test_criterion_08_bk_inequality():
    t0 = time.time()
    ok1, d1 = verify.check_bk(ANN_SMALL, n_random_bc=40)
    ok2, d2 = verify.check_bk(ANN_NEXT, n_random_bc=20)
    _report(8, ok1 and ok2, f"annulus(1,3): {d1}; annulus(2,4): {d2}", t0, 120.0)


def test_criterion_09_weak_disorder_stability():
    t0 = time.time()
    N = 32
    eps_star = 0.2 * N ** (-7.0 / 8.0)
    sched = est.production_schedule(N, snapshots=700)
    base, _ = est.estimate_boundary_influence(T_C, N, 0.0, replicas=32,
                                              schedule=sched, seed=301,
                                              threads=THREADS)
    details = [f"m0={base.value:.4f}+-{base.se:.4f}"]
    ok = True
    tested = []
    for eps in (eps_star, 0.05):
        e, _ = est.estimate_boundary_influence(T_C, N, eps, replicas=48,
                                               schedule=sched, seed=302,
                                               threads=THREADS)
        tested.append((eps, e))
        details.append(f"m({eps:.4f})={e.value:.4f}+-{e.se:.4f}")
    m_star = tested[0][1]
    joint = math.hypot(m_star.se, base.se)
    ok &= m_star.value >= 0.8 * base.value - 3 * joint     # lower stability bound
    for eps, e in tested:                                   # DSS monotonicity
        ok &= e.value <= base.value + 3 * math.hypot(e.se, base.se)
    _report(9, ok, "; ".join(details) + f" [eps* = 0.2 N^-7/8 = {eps_star:.5f}]",
            t0, 30 * 60.0)


def test_criterion_10_crossover_collapse():
    t0 = time.time()
    xs = (0.25, 1.0, 4.0)
    ns = (16, 32, 64)
    budgets = {16: (24, 500), 32: (20, 420), 64: (14, 320)}
    y = {}
    dy = {}
    for N in ns:
        reps, snaps = budgets[N]
        for x in xs:
            eps = (x / N) ** (7.0 / 8.0)
            sched = est.production_schedule(N, snapshots=snaps)
            e, _ = est.estimate_boundary_influence(T_C, N, eps, replicas=reps,
                                                   schedule=sched, seed=500,
                                                   threads=THREADS)
            y[(N, x)] = e.value * N ** 0.125
            dy[(N, x)] = e.se * N ** 0.125
    ok = True
    details = []
    for N in ns:                       # y decreasing in x within error
        for a, b in zip(xs, xs[1:]):
            ok &= y[(N, b)] <= y[(N, a)] + 3 * math.hypot(dy[(N, a)], dy[(N, b)])
    for x in xs:                       # N-independence at fixed x: spread < 25%
        vals = [y[(N, x)] for N in ns]
        spread = (max(vals) - min(vals)) / max(vals)
        ok &= spread < 0.25
        details.append(f"x={x}: y=({', '.join(f'{v:.3f}' for v in vals)}), spread {spread:.1%}")
    _report(10, ok, "; ".join(details), t0, 2 * 3600.0)


def test_criterion_11_correlation_length_monotone():
    t0 = time.time()
    T = 0.8 * T_C
    results = {}
    for eps in (0.6, 0.4):
        results[eps] = est.find_correlation_length(
            T, eps, seed=600, mode="psi_star", replicas=16, n_max=64,
            threads=THREADS, snapshots=350)
    r_hi, r_lo = results[0.6], results[0.4]
    detail = (f"eps=0.6 bracket [{r_hi.n_lo}, {r_hi.n_hi}], "
              f"eps=0.4 bracket [{r_lo.n_lo}, {r_lo.n_hi}]")
    ok = (not r_hi.open_ended) and (
        r_lo.open_ended or r_lo.n_lo >= r_hi.n_hi)   # beyond bracket overlap
    _report(11, ok, detail, t0, 2 * 3600.0)


def test_criterion_12_manifest_determinism(tmp_path):
    t0 = time.time()
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"T": "Tc", "N": 2, "eps": 0.4,
                               "replicas": 4, "snapshots": 80}))
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert cli_main(["estimate-m", "--config", str(cfg), "--seed", "17",
                     "--out", str(out1), "--threads", "1"]) == 0
    assert cli_main(["estimate-m", "--config", str(out1 / "manifest.json"),
                     "--seed", "17", "--out", str(out2), "--threads", "3"]) == 0
    same = ((out1 / "estimate_m.csv").read_bytes() == (out2 / "estimate_m.csv").read_bytes()
            and (out1 / "quenched.csv").read_bytes() == (out2 / "quenched.csv").read_bytes())
    _report(12, same, "manifest replay with a different --threads is byte-identical",
            t0, 600.0)
