import json
import subprocess
import sys
from pathlib import Path

import pytest

PKG = [sys.executable, "-m", "aerovr.cli"]


def run_cli(*args, **kw):
    return subprocess.run(PKG + list(args), capture_output=True, text=True, **kw)


def kv(stdout):
    out = {}
    for line in stdout.splitlines():
        if "=" in line:
            k, _, v = line.partition("=")
            out[k] = v
    return out


@pytest.fixture(scope="module")
def demo_paths(demo_root):
    d = demo_root / "demo"
    return d / "designs.csv", d / "domain.json"


class TestFit:
    def test_writes_exports(self, demo_paths, tmp_path):
        csv, dom = demo_paths
        r = run_cli("fit", "--input", str(csv), "--domain", str(dom),
                    "--qoi", "efficiency", "--out-dir", str(tmp_path))
        assert r.returncode == 0, r.stderr
        sub = json.loads((tmp_path / "subspace-efficiency.json").read_text())
        plot = json.loads((tmp_path / "plot-efficiency.json").read_text())
        assert sub["qoi"] == "efficiency" and sub["m"] == 2
        assert len(plot["points"]) == 40
        assert kv(r.stdout)["m_efficiency"] == "2"

    def test_all_qois_by_default(self, demo_paths, tmp_path):
        csv, dom = demo_paths
        r = run_cli("fit", "--input", str(csv), "--domain", str(dom),
                    "--out-dir", str(tmp_path))
        assert r.returncode == 0
        assert (tmp_path / "subspace-pressure_ratio.json").exists()
        assert (tmp_path / "plot-efficiency.json").exists()

    def test_deterministic_outputs(self, demo_paths, tmp_path):
        csv, dom = demo_paths
        out1, out2 = tmp_path / "a", tmp_path / "b"
        for out in (out1, out2):
            assert run_cli("fit", "--input", str(csv), "--domain", str(dom),
                           "--out-dir", str(out)).returncode == 0
        for name in ("subspace-efficiency.json", "plot-efficiency.json"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_missing_input_exit_2(self, demo_paths):
        _, dom = demo_paths
        r = run_cli("fit", "--input", "missing.csv", "--domain", str(dom))
        assert r.returncode == 2
        assert "missing.csv" in r.stderr

    def test_usage_error_exit_1(self):
        r = run_cli("fit")
        assert r.returncode == 1


class TestExportPlots:
    def test_plots_only(self, demo_paths, tmp_path):
        csv, dom = demo_paths
        r = run_cli("export-plots", "--input", str(csv), "--domain", str(dom),
                    "--qoi", "pressure_ratio", "--out-dir", str(tmp_path))
        assert r.returncode == 0
        assert (tmp_path / "plot-pressure_ratio.json").exists()
        assert not (tmp_path / "subspace-pressure_ratio.json").exists()


class TestIngest:
    def test_reports_shape(self, demo_paths):
        csv, dom = demo_paths
        r = run_cli("ingest", "--input", str(csv), "--domain", str(dom))
        assert r.returncode == 0
        info = kv(r.stdout)
        assert info["n"] == "40" and info["d"] == "5"
        assert "efficiency" in info["qois"]


class TestVerifySynthetic:
    def test_small_regime_passes(self):
        r = run_cli("verify-synthetic", "--d", "8", "--n", "120", "--seed", "42")
        assert r.returncode == 0, r.stderr
        info = kv(r.stdout)
        assert float(info["exact-ridge-1d.subspace_angle"]) <= 1e-6
        assert float(info["exact-ridge-2d.subspace_angle"]) <= 1e-6
        assert info["exact-ridge-1d.m"] == "1"
        assert info["exact-ridge-2d.m"] == "2"
        assert info["status"] == "ok"

    def test_determinism(self):
        a = run_cli("verify-synthetic", "--d", "6", "--n", "80", "--seed", "5")
        b = run_cli("verify-synthetic", "--d", "6", "--n", "80", "--seed", "5")
        assert a.stdout == b.stdout

    def test_too_few_samples_exit_2(self):
        r = run_cli("verify-synthetic", "--d", "25", "--n", "100")
        assert r.returncode == 2


class TestReplay:
    def test_replays_log(self, demo_root, tmp_path):
        log = tmp_path / "session.jsonl"
        events = [
            {"t": "T", "op": "select_point",
             "args": {"plot_id": "A", "index": 4}},
            {"t": "T", "op": "activate_selector",
             "args": {"plot_id": "A", "kind": "move", "active": True}},
            {"t": "T", "op": "move_plots",
             "args": {"plot_ids": ["A"], "target": [1.0, 2.0, 3.0]}},
        ]
        log.write_text("\n".join(json.dumps(e) for e in events) + "\n")
        r = run_cli("replay", "--log", str(log), "--data-root", str(demo_root))
        assert r.returncode == 0, r.stderr
        info = kv(r.stdout)
        assert info["selected_index"] == "4"
        assert info["pose_A.position"] == "1.0,2.0,3.0"

    def test_requires_dataset(self, tmp_path):
        log = tmp_path / "empty.jsonl"
        log.write_text("")
        r = run_cli("replay", "--log", str(log))
        assert r.returncode == 2


class TestMakeDemo:
    def test_generates_loadable_dataset(self, tmp_path):
        out = tmp_path / "ds"
        r = run_cli("make-demo", "--out-dir", str(out), "--d", "4",
                    "--n", "30", "--no-geometry")
        assert r.returncode == 0
        assert (out / "designs.csv").exists()
        r2 = run_cli("ingest", "--input", str(out / "designs.csv"),
                     "--domain", str(out / "domain.json"))
        assert kv(r2.stdout)["n"] == "30"
