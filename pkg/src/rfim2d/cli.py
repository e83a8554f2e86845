"""Command-line entry point: experiment orchestration and verification.

Every command reads a JSON config (unknown keys rejected), draws all
randomness from one master seed, writes CSV results plus a JSON manifest
{command, config, seed, started, ended, tool_version}, and prints a short
summary.  Re-running with a manifest as the config reproduces byte-identical
CSVs, independent of --threads.

Exit codes: 0 ok, 1 failed verification, 2 config/schema error,
3 output-dir error, 4 budget overrun.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__, estimators, oracle, verify
from .disorder import Seed, sample_field, zero_field
from .lattice import RegionError, build_region
from .model import GibbsSpec, SpecError, T_C
from .oracle import EventSpec
from .sampler import UpdateSchedule

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_OUTDIR, EXIT_BUDGET = 0, 1, 2, 3, 4

SCHEMAS = {
    "verify": {"level"},
    "estimate-m": {"T", "N", "eps", "replicas", "snapshots"},
    "crossing": {"T", "region", "eps", "event", "event_params", "replicas",
                 "snapshots", "bc_plus", "bc_minus"},
    "goodbox": {"u", "M", "eps", "field_seed", "budget", "around_min", "snapshots"},
    "sweep": {"T", "grid", "replicas", "snapshots"},
    "xi": {"T", "eps", "mode", "target", "replicas", "n_max", "snapshots"},
    "surface": {"region", "T", "eps_list", "n_fields"},
}


class ConfigError(ValueError):
    pass


def _resolve_T(value):
    if value in ("Tc", "tc", None):
        return T_C
    return float(value)


def load_config(path, command):
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    if "command" in raw and "config" in raw:          # a manifest: replay it
        if raw["command"] != command:
            raise ConfigError(
                f"manifest is for command {raw['command']!r}, not {command!r}")
        return dict(raw["config"])
    return dict(raw)


def validate_config(command, cfg):
    allowed = SCHEMAS[command]
    unknown = set(cfg) - allowed
    if unknown:
        raise ConfigError(f"unknown config keys for {command}: {sorted(unknown)}")
    return cfg


def _region_from_cfg(cfg):
    spec = cfg.get("region", {"kind": "box", "params": 2})
    kind = spec.get("kind", "box")
    params = spec.get("params")
    params = tuple(params) if isinstance(params, list) else params
    return build_region(kind, params)


def write_outputs(outdir, command, cfg, seed, csv_name, csv_text, summary, started):
    try:
        os.makedirs(outdir, exist_ok=True)
        testfile = os.path.join(outdir, ".write_test")
        with open(testfile, "w") as fh:
            fh.write("")
        os.remove(testfile)
    except OSError as exc:
        raise PermissionError(f"output directory not writable: {exc}") from exc
    csv_path = os.path.join(outdir, csv_name)
    with open(csv_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(csv_text)
    manifest = {
        "command": command,
        "config": cfg,
        "seed": seed,
        "started": started,
        "ended": time.strftime("%Y-%m-%dT%H:%M:%S"),
        "tool_version": __version__,
    }
    with open(os.path.join(outdir, "manifest.json"), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(os.path.join(outdir, "summary.txt"), "w", encoding="utf-8") as fh:
        fh.write(summary)
    print(summary, end="")
    return csv_path


# ---------------------------------------------------------------------------
# Commands


def cmd_verify(cfg, seed, outdir, threads, level):
    level = level or cfg.get("level", "fast")
    if level not in ("fast", "full"):
        raise ConfigError("level must be fast or full")
    started = time.strftime("%Y-%m-%dT%H:%M:%S")
    results = verify.run_suite(level)
    lines = ["check,passed,seconds,detail"]
    summary = []
    n_fail = 0
    for r in results:
        lines.append(f"{r.name},{int(r.passed)},{r.seconds:.3f},\"{r.detail}\"")
        state = "PASS" if r.passed else "FAIL"
        n_fail += 0 if r.passed else 1
        summary.append(f"{state}  {r.name}: {r.detail}\n")
    summary.append(f"{len(results) - n_fail}/{len(results)} checks passed ({level} level)\n")
    write_outputs(outdir, "verify", {"level": level}, seed, "verify.csv",
                  "\n".join(lines) + "\n", "".join(summary), started)
    return EXIT_VERIFY if n_fail else EXIT_OK


def cmd_estimate_m(cfg, seed, outdir, threads):
    T = _resolve_T(cfg.get("T", "Tc"))
    N = int(cfg.get("N", 8))
    eps = float(cfg.get("eps", 0.0))
    replicas = int(cfg.get("replicas", 64))
    snapshots = int(cfg.get("snapshots", 800))
    started = time.strftime("%Y-%m-%dT%H:%M:%S")
    sched = estimators.production_schedule(N, snapshots=snapshots)
    est, per_replica = estimators.estimate_boundary_influence(
        T, N, eps, replicas, schedule=sched, seed=seed, threads=threads)
    qs = estimators.quenched_quantiles(per_replica)
    lines = ["T,N,eps,m,se,samples,replicas,q05,q25,q50,q75,q95"]
    lines.append(
        f"{T:.17g},{N},{eps:.17g},{est.value:.17g},{est.se:.17g},{est.n_samples},"
        f"{replicas},{qs[5]:.17g},{qs[25]:.17g},{qs[50]:.17g},{qs[75]:.17g},{qs[95]:.17g}")
    quench = ["replica,m,se,samples"]
    for r in per_replica:
        quench.append(f"{r.replica},{r.value:.17g},{r.se:.17g},{r.n_samples}")
    summary = (f"m(T={T:.4f}, N={N}, eps={eps}) = {est.value:.6f} +- {est.se:.6f} "
               f"({replicas} replicas, {est.n_samples} samples)\n")
    write_outputs(outdir, "estimate-m", cfg, seed, "estimate_m.csv",
                  "\n".join(lines) + "\n", summary, started)
    with open(os.path.join(outdir, "quenched.csv"), "w", encoding="utf-8") as fh:
        fh.write("\n".join(quench) + "\n")
    return EXIT_OK


def cmd_crossing(cfg, seed, outdir, threads):
    T = _resolve_T(cfg.get("T", "Tc"))
    region = _region_from_cfg(cfg)
    eps = float(cfg.get("eps", 0.0))
    event = EventSpec(cfg.get("event", "con"),
                      tuple(tuple(p) if isinstance(p, list) else p
                            for p in cfg.get("event_params", [])))
    replicas = int(cfg.get("replicas", 16))
    snapshots = int(cfg.get("snapshots", 500))
    bc_plus = cfg.get("bc_plus", "+")
    bc_minus = cfg.get("bc_minus", "-")
    if isinstance(bc_plus, list):
        bc_plus = tuple(bc_plus)
    if isinstance(bc_minus, list):
        bc_minus = tuple(bc_minus)
    started = time.strftime("%Y-%m-%dT%H:%M:%S")
    sched = estimators.production_schedule(max(region.params), snapshots=snapshots)
    est = estimators.estimate_event_prob(event, region, T, eps, replicas,
                                         schedule=sched, seed=seed,
                                         bc_plus=bc_plus, bc_minus=bc_minus,
                                         threads=threads)
    lines = ["event,region,T,eps,prob,se,samples"]
    lines.append(f"{event.kind},{region.kind}{region.params},{T:.17g},{eps:.17g},"
                 f"{est.value:.17g},{est.se:.17g},{est.n_samples}")
    summary = f"P({event.kind}) on {region.kind}{region.params} = {est.value:.6f} +- {est.se:.6f}\n"
    write_outputs(outdir, "crossing", cfg, seed, "crossing.csv",
                  "\n".join(lines) + "\n", summary, started)
    return EXIT_OK


def cmd_goodbox(cfg, seed, outdir, threads):
    u = tuple(cfg.get("u", (0, 0)))
    M = int(cfg.get("M", 2))
    eps = float(cfg.get("eps", 0.3))
    budget = int(cfg.get("budget", 400_000))
    snapshots = int(cfg.get("snapshots", 300))
    thresholds = estimators.GoodBoxThresholds(
        around_min=float(cfg.get("around_min", 0.05)))
    started = time.strftime("%Y-%m-%dT%H:%M:%S")
    ambient = build_region("box", 6 * M, center=u)
    field = sample_field(ambient, Seed(int(cfg.get("field_seed", seed))))
    verdict = estimators.classify_good_box(u, M, field, eps,
                                           thresholds=thresholds, budget=budget,
                                           seed=seed, snapshots=snapshots)
    lines = ["u,M,eps,verdict,around_plus_minus,around_se,around_anti,fraction,tested_xi,updates"]
    lines.append(f"\"{u}\",{M},{eps:.17g},{verdict.verdict},{verdict.around_worst:.17g},"
                 f"{verdict.around_se:.17g},{verdict.around_anti:.17g},"
                 f"{verdict.fraction:.17g},{verdict.tested_xi},{verdict.updates_used}")
    summary = (f"box Lambda_{M}({u}) at eps={eps}: {verdict.verdict} "
               f"(worst circuit prob {verdict.around_worst:.4f}, fraction {verdict.fraction:.2f})\n")
    write_outputs(outdir, "goodbox", cfg, seed, "goodbox.csv",
                  "\n".join(lines) + "\n", summary, started)
    if verdict.verdict == "undetermined":
        return EXIT_BUDGET
    return EXIT_OK


def cmd_sweep(cfg, seed, outdir, threads):
    T = _resolve_T(cfg.get("T", "Tc"))
    grid = [(int(n), float(e)) for n, e in cfg.get("grid", [[8, 0.0]])]
    replicas = int(cfg.get("replicas", 64))
    snapshots = int(cfg.get("snapshots", 600))
    started = time.strftime("%Y-%m-%dT%H:%M:%S")
    rows = estimators.scaling_table(
        T, grid, replicas, seed=seed,
        schedule_for=lambda N: estimators.production_schedule(N, snapshots=snapshots),
        threads=threads)
    csv_text = estimators.scaling_csv(rows)
    summary = "".join(
        f"N={r.N:4d} eps={r.eps:.5f}  m={r.m:.5f}+-{r.se:.5f}  x={r.x:.4f} y={r.y:.4f}\n"
        for r in rows)
    write_outputs(outdir, "sweep", cfg, seed, "sweep.csv", csv_text, summary, started)
    return EXIT_OK


def cmd_xi(cfg, seed, outdir, threads):
    T = _resolve_T(cfg.get("T", 0.8 * T_C))
    eps = float(cfg.get("eps", 0.5))
    mode = cfg.get("mode", "psi_star")
    target = cfg.get("target")
    replicas = int(cfg.get("replicas", 24))
    n_max = int(cfg.get("n_max", 128))
    snapshots = int(cfg.get("snapshots", 500))
    started = time.strftime("%Y-%m-%dT%H:%M:%S")
    res = estimators.find_correlation_length(
        T, eps, seed=seed, mode=mode, target=target, replicas=replicas,
        n_max=n_max, threads=threads, snapshots=snapshots)
    lines = ["T,eps,mode,n_lo,n_hi,open_ended"]
    hi = "" if res.n_hi is None else str(res.n_hi)
    lines.append(f"{T:.17g},{eps:.17g},{mode},{res.n_lo},{hi},{int(res.open_ended)}")
    lines.append("")
    lines.append("N,eps_eval,m,se")
    for (N, e, m, se) in res.evaluations:
        lines.append(f"{N},{e:.17g},{m:.17g},{se:.17g}")
    summary = (f"correlation length ({mode}) at T={T:.4f}, eps={eps}: "
               f"bracket [{res.n_lo}, {hi or 'open'}]\n")
    write_outputs(outdir, "xi", cfg, seed, "xi.csv",
                  "\n".join(lines) + "\n", summary, started)
    return EXIT_OK


def cmd_surface(cfg, seed, outdir, threads):
    region_cfg = cfg.get("region", {"kind": "annulus", "params": [1, 3]})
    region = build_region(region_cfg.get("kind", "annulus"),
                          tuple(region_cfg.get("params", (1, 3))))
    if region.kind != "annulus":
        raise ConfigError("surface command needs an annulus region")
    T = _resolve_T(cfg.get("T", "Tc"))
    eps_list = [float(e) for e in cfg.get("eps_list", [0.0, 0.3, 1.0])]
    n_fields = int(cfg.get("n_fields", 5))
    started = time.strftime("%Y-%m-%dT%H:%M:%S")
    lines = ["field_seed,eps,T_surface,P_con,minus_T_log_P_nocon,defect"]
    worst = 0.0
    for k in range(n_fields):
        fld = sample_field(region, Seed(seed, k))
        for eps in eps_list:
            st = oracle.exact_surface_tension(
                region, region.outer_boundary, region.inner_boundary, fld, eps, T)
            dist = oracle.exact_con_distribution(region, fld, eps, T)
            rhs = -T * math.log(dist[0])
            pcon = float(dist[1] + dist[2])
            worst = max(worst, abs(st - rhs))
            lines.append(f"{k},{eps:.17g},{st:.17g},{pcon:.17g},{rhs:.17g},{abs(st - rhs):.3e}")
    summary = (f"surface tension identity on {region.kind}{region.params} at T={T:.4f}: "
               f"max defect {worst:.2e} over {n_fields} fields\n")
    write_outputs(outdir, "surface", cfg, seed, "surface.csv",
                  "\n".join(lines) + "\n", summary, started)
    return EXIT_OK


COMMANDS = {
    "verify": cmd_verify,
    "estimate-m": cmd_estimate_m,
    "crossing": cmd_crossing,
    "goodbox": cmd_goodbox,
    "sweep": cmd_sweep,
    "xi": cmd_xi,
    "surface": cmd_surface,
}


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="rfim2d",
        description="Desk-scale laboratory for the 2D random-field Ising model")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", default=None, help="JSON config (or a manifest to replay)")
    parser.add_argument("--seed", type=int, default=0, help="master seed (u64)")
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--level", choices=("fast", "full"), default=None,
                        help="verify only")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config, args.command) if args.config else {}
        validate_config(args.command, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        if args.command == "verify":
            return cmd_verify(cfg, args.seed, args.out, args.threads, args.level)
        return COMMANDS[args.command](cfg, args.seed, args.out, args.threads)
    except (ConfigError, SpecError, RegionError, oracle.OracleError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PermissionError as exc:
        print(f"output error: {exc}", file=sys.stderr)
        return EXIT_OUTDIR


if __name__ == "__main__":
    sys.exit(main())
