import json
import subprocess
import sys

import numpy as np
import pytest

from landscape_rover.cli import EXIT_BUDGET, EXIT_CONFIG, EXIT_OK, main
from landscape_rover.config import ConfigError, build_config, load_config
from landscape_rover.output import read_trajectory_csv, trajectory_header


def run_cli(tmp_path, *args, name="out"):
    out = tmp_path / name
    status = main(list(args) + ["--out-dir", str(out)])
    manifest = json.loads((out / "manifest.json").read_text()) \
        if (out / "manifest.json").exists() else None
    return status, out, manifest


def test_ascend_writes_trajectory_and_manifest(tmp_path):
    status, out, man = run_cli(tmp_path, "ascend", "--seed", "1")
    assert status == EXIT_OK
    lines = (out / "trajectory.csv").read_text().splitlines()
    assert lines[0].split(",") == trajectory_header(8)
    assert lines[0].startswith("iter,s,J,grad_norm,rel_distance,event,x0")
    rows = read_trajectory_csv(out / "trajectory.csv")
    assert rows[-1]["event"] == "converged"
    assert man["summary"]["converged"] and man["summary"]["final_J"] > 0.99
    assert man["outputs"] == ["trajectory.csv"]
    assert man["prng"] == {"algorithm": "PCG64", "seed": 1}


def test_manifest_lab_time_accounting(tmp_path):
    _, _, man = run_cli(tmp_path, "descend", "--seed", "2", "--set", "max_iter=4")
    assert man["measurement_count"] == 4 * 17
    assert man["total_lab_time"] == pytest.approx(3.0 * man["measurement_count"])
    assert man["measurement_cost_s"] == 3.0


def test_replay_is_byte_identical(tmp_path):
    args = ("levelset-distance", "--seed", "5")
    _, a, _ = run_cli(tmp_path, *args, name="a")
    _, b, _ = run_cli(tmp_path, *args, name="b")
    assert (a / "trajectory.csv").read_bytes() == (b / "trajectory.csv").read_bytes()
    ma = json.loads((a / "manifest.json").read_text())
    mb = json.loads((b / "manifest.json").read_text())
    ma["config"].pop("out_dir"), mb["config"].pop("out_dir")
    assert ma == mb


def test_different_seeds_differ(tmp_path):
    _, a, _ = run_cli(tmp_path, "ascend", "--seed", "1", "--set", "max_iter=3", name="a")
    _, b, _ = run_cli(tmp_path, "ascend", "--seed", "2", "--set", "max_iter=3", name="b")
    assert (a / "trajectory.csv").read_bytes() != (b / "trajectory.csv").read_bytes()


def test_budget_exhaustion_keeps_partial_output(tmp_path):
    status, out, man = run_cli(tmp_path, "ascend", "--budget", "60")
    assert status == EXIT_BUDGET
    assert man["partial"] and man["measurement_count"] == 60
    # three complete iterations of 17 measurements fit
    assert len(read_trajectory_csv(out / "trajectory.csv")) == 3


@pytest.mark.parametrize("extra", [
    ["--set", "bogus_key=1"],
    ["--set", "n_samples=\"many\""],
    ["--set", "beta=0"],
    ["--set", "x_init=[1,2,3]"],
    ["--set", "noequals"],
])
def test_invalid_config_exits_2(tmp_path, extra):
    status = main(["ascend", "--out-dir", str(tmp_path)] + extra)
    assert status == EXIT_CONFIG


def test_unreadable_config_file_exits_2(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["ascend", "--config", str(bad), "--out-dir", str(tmp_path)]) == EXIT_CONFIG


def test_config_file_and_precedence(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"seed": 4, "d": 2.0}))
    env = {"ROVER_SEED": "9"}
    assert load_config(str(path), env=env).seed == 4
    assert load_config(None, env=env).seed == 9
    assert load_config(str(path), {"seed": 7}, env=env).seed == 7
    assert load_config(str(path), env={}).d == 2.0
    with pytest.raises(ConfigError):
        build_config(env={"ROVER_SEED": "x"})


def test_rover_seed_environment_variable(tmp_path, monkeypatch):
    monkeypatch.setenv("ROVER_SEED", "13")
    _, _, man = run_cli(tmp_path, "calibrate")
    assert man["prng"]["seed"] == 13


def test_calibrate_prints_constants(tmp_path, capsys):
    status, _, man = run_cli(tmp_path, "calibrate")
    assert status == EXIT_OK
    assert "calib_k" in capsys.readouterr().out
    assert man["summary"]["calib_k"] == pytest.approx(np.pi / 2 / (37 * 500e-6))
    assert man["summary"]["dc_optimum_J_noiseless"] == pytest.approx(1.0)


def test_hessian_probe_at_optimum(tmp_path):
    status, out, man = run_cli(tmp_path, "hessian-probe", "--at", "optimal", "--seed", "3")
    assert status == EXIT_OK
    doc = json.loads((out / "hessian_optimal.json").read_text())
    assert (doc["n_neg"], doc["n_null"], doc["n_pos"]) == (2, 6, 0)
    assert doc["label"] == "max-like"
    assert len(doc["eigenvectors"]) == 8
    assert man["measurement_count"] == 501 + 16


def test_hessian_probe_at_explicit_point(tmp_path):
    x = json.dumps([0, 0, 0, 0, -37, -37, -37, -37])
    _, out, man = run_cli(tmp_path, "hessian-probe", "--at", x)
    assert man["summary"]["label"] == "min-like"
    assert (out / "hessian_point.json").exists()


def test_hessian_probe_sweep_from_trajectory_files(tmp_path):
    _, up, _ = run_cli(tmp_path, "ascend", "--seed", "1", name="up")
    _, down, _ = run_cli(tmp_path, "descend", "--seed", "1", name="down")
    status, out, man = run_cli(tmp_path, "hessian-probe", "--sweep",
                               "--trajectory", str(up / "trajectory.csv"),
                               "--trajectory", str(down / "trajectory.csv"), name="sweep")
    assert status == EXIT_OK
    heights = man["summary"]["heights"]
    assert [h["target"] for h in heights] == [1.0, 0.71, 0.31, 0.03, -1.0]
    assert heights[0]["label"] == "max-like" and heights[-1]["label"] == "min-like"
    assert (out / "hessian_J+1.00.json").exists() and (out / "hessian_J-1.00.json").exists()


def test_scan_eigenvectors(tmp_path):
    status, out, man = run_cli(tmp_path, "scan-eigenvectors", "--seed", "2",
                               "--set", "scan_points=9")
    assert status == EXIT_OK
    assert len(man["summary"]["scans"]) == 8
    lines = (out / "scan_v8.csv").read_text().splitlines()
    assert lines[0] == "t,J,J_fit" and len(lines) == 10
    negative = [s for s in man["summary"]["scans"] if not s["null"]]
    assert len(negative) == 2 and all(s["a"] < 0 for s in negative)


def test_drive_top(tmp_path):
    status, out, man = run_cli(tmp_path, "drive-top", "--set", "n_iter=3")
    assert status == EXIT_OK
    assert man["summary"]["n_neg_per_iteration"] == [2, 2, 2]
    events = [r["event"] for r in read_trajectory_csv(out / "trajectory.csv")]
    assert events == ["hessian-probe"] * 3 + ["step"]


def test_levelset_energy(tmp_path):
    status, _, man = run_cli(tmp_path, "levelset-energy", "--set", "n_iter=5")
    assert status == EXIT_OK
    assert 0.5 <= man["summary"]["J0"] <= 0.7
    assert man["summary"]["energy_ratio"] < 1.0


def test_noise_sigma_flag(tmp_path):
    _, _, man = run_cli(tmp_path, "calibrate", "--noise-sigma", "0.01")
    assert man["config"]["noise_sigma"] == 0.01
    assert man["summary"]["gradient_noise_per_component"] == pytest.approx(0.01 / (2**0.5 * 3))


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "landscape_rover.cli", "calibrate",
                           "--out-dir", str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "calib_k" in proc.stdout


def test_ascend_seed_42_example(tmp_path):
    status, _, man = run_cli(tmp_path, "ascend", "--seed", "42", "--noise-sigma", "1e-3")
    assert status == EXIT_OK
    assert man["summary"]["final_J"] >= 0.99
    assert man["total_lab_time"] == 3.0 * man["measurement_count"]
