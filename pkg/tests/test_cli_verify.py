import json
import os
import subprocess
import sys

import pytest

from rfim2d import verify
from rfim2d.cli import main


def run_cli(args):
    return main(args)


def test_verify_fast_passes(tmp_path):
    code = run_cli(["verify", "--level", "fast", "--out", str(tmp_path / "v")])
    assert code == 0
    csv = (tmp_path / "v" / "verify.csv").read_text()
    assert csv.startswith("check,passed")
    manifest = json.loads((tmp_path / "v" / "manifest.json").read_text())
    assert manifest["command"] == "verify"
    assert set(manifest) == {"command", "config", "seed", "started", "ended", "tool_version"}


def test_full_suite_has_at_least_12_identities():
    names = {name for name, _ in verify.FULL_CHECKS}
    assert len(names) >= 12


def test_tampered_t_constant_fails_coupling(monkeypatch):
    # fault injection: break t^2 = (1-p)/p and watch the Lemma 2.4 check fail
    import rfim2d.model as model
    real = model.edge_t2
    monkeypatch.setattr(model, "edge_t2", lambda T: 1.3 * real(T))
    # the extended route consumes t^2 through GibbsSpec.t2 -> patch that too
    monkeypatch.setattr(model.GibbsSpec, "p", property(lambda self: 1.0 / (1.0 + 1.3 * real(self.T))))
    from rfim2d.lattice import build_region
    ok, detail = verify.check_coupling(build_region("box", 1), n_fields=1)
    assert not ok


def test_unknown_config_keys_rejected(tmp_path):
    cfg = tmp_path / "bad.json"
    cfg.write_text('{"bogus": 1}')
    code = run_cli(["estimate-m", "--config", str(cfg), "--out", str(tmp_path / "o")])
    assert code == 2
    assert not (tmp_path / "o" / "estimate_m.csv").exists()   # no partial artifacts


def test_invalid_region_rejected_no_artifacts(tmp_path):
    cfg = tmp_path / "bad2.json"
    cfg.write_text(json.dumps({"region": {"kind": "annulus", "params": [3, 2]},
                               "event": "con"}))
    code = run_cli(["crossing", "--config", str(cfg), "--out", str(tmp_path / "o2")])
    assert code == 2
    assert not (tmp_path / "o2").exists() or not os.listdir(tmp_path / "o2")


def test_estimate_m_writes_artifacts_and_manifest_replays(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"T": "Tc", "N": 1, "eps": 0.0,
                               "replicas": 3, "snapshots": 80}))
    out1 = tmp_path / "r1"
    assert run_cli(["estimate-m", "--config", str(cfg), "--seed", "9",
                    "--out", str(out1), "--threads", "1"]) == 0
    csv1 = (out1 / "estimate_m.csv").read_bytes()
    # replay from the manifest with a different thread count
    out2 = tmp_path / "r2"
    assert run_cli(["estimate-m", "--config", str(out1 / "manifest.json"),
                    "--seed", "9", "--out", str(out2), "--threads", "3"]) == 0
    assert (out2 / "estimate_m.csv").read_bytes() == csv1
    assert (out2 / "quenched.csv").read_bytes() == (out1 / "quenched.csv").read_bytes()


def test_manifest_for_wrong_command_rejected(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"T": "Tc", "N": 1, "eps": 0.0,
                               "replicas": 2, "snapshots": 40}))
    out1 = tmp_path / "r1"
    assert run_cli(["estimate-m", "--config", str(cfg), "--out", str(out1)]) == 0
    assert run_cli(["sweep", "--config", str(out1 / "manifest.json"),
                    "--out", str(tmp_path / "r3")]) == 2


def test_surface_command_exact(tmp_path):
    cfg = tmp_path / "s.json"
    cfg.write_text(json.dumps({"region": {"kind": "annulus", "params": [1, 3]},
                               "eps_list": [0.0, 1.0], "n_fields": 2}))
    out = tmp_path / "surf"
    assert run_cli(["surface", "--config", str(cfg), "--out", str(out)]) == 0
    lines = (out / "surface.csv").read_text().strip().split("\n")
    assert lines[0].startswith("field_seed,eps")
    for row in lines[1:]:
        defect = float(row.split(",")[-1])
        assert defect < 1e-8


def test_console_entrypoint_runs():
    proc = subprocess.run([sys.executable, "-m", "rfim2d.cli", "verify",
                           "--level", "fast", "--out", "/tmp/_cli_selftest"],
                          capture_output=True, text=True, timeout=600)
    assert proc.returncode == 0
    assert "checks passed" in proc.stdout
