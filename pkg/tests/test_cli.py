import json
import subprocess
import sys

import numpy as np
import pytest
import yaml

from propertime import cli, io

FAST = {
    "grids": {"hyperbolic": {"sizes": [32, 64, 16], "bounds": {"omega_max": 5.0}},
              "spherical": {"sizes": [32, 24, 16], "bounds": {"r_max": 8.0}},
              "position": {"sizes": [48, 96, 16], "bounds": {"omega_max": 6.0}}},
    "truncations": {"l_max": 4, "n_lambda": 32},
    "axes": {"t": {"range": [-40.0, 40.0], "step": 0.5}, "z": {"range": [-20.0, 20.0], "step": 0.5}},
    "taus": [0.0, 2.0, 4.0],
    "covariance": {"refine": False},
}


@pytest.fixture
def fast_config(tmp_path):
    p = tmp_path / "fast.yaml"
    p.write_text(yaml.safe_dump(FAST))
    return p


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, (json.loads(out) if out.strip() else None), err


def test_spectrum(capsys, tmp_path):
    code, out, _ = run(capsys, "spectrum", "--out", tmp_path, "--phi", "pi", "--n-range", -3, 3)
    assert code == 0 and out["z"] == [-5, -3, -1, 1, 3, 5]
    assert (tmp_path / "spectrum.csv").read_text().splitlines()[2] == "n,z"


@pytest.mark.parametrize("cmd", ["time-density", "position-density"])
def test_densities(capsys, tmp_path, fast_config, cmd):
    code, out, _ = run(capsys, cmd, "--config", fast_config, "--out", tmp_path, "--format", "json")
    assert code == 0
    prof = io.read_profile_json(out["file"])
    assert prof.total_mass == pytest.approx(out["total_mass"])


def test_overlap_z(capsys, tmp_path):
    code, out, _ = run(capsys, "overlap", "--out", tmp_path, "--range", "0:4", "--step", 0.5)
    assert code == 0 and out["points"] == 9 and out["max_reference_error"] < 1e-10


def test_overlap_t(capsys, tmp_path):
    code, out, _ = run(capsys, "overlap", "--out", tmp_path, "--axis", "t", "--range", "0:2", "--step", 1)
    assert code == 0 and out["max_reference_error"] < 1e-4


def test_admissibility_expectations(capsys, tmp_path, fast_config):
    code, out, _ = run(capsys, "admissibility", "--config", fast_config, "--out", tmp_path,
                       "--expect", "admissible")
    assert code == 0 and out["admissible"]
    code, _, _ = run(capsys, "admissibility", "--config", fast_config, "--out", tmp_path,
                     "--expect", "inadmissible")
    assert code == cli.EXIT_CHECK


def test_evolve_check(capsys, tmp_path, fast_config):
    code, out, _ = run(capsys, "evolve", "--config", fast_config, "--out", tmp_path, "--workers", 2, "--check")
    assert code == 0
    assert out["slope"] == pytest.approx(out["momentum_over_m"], rel=0.01)
    assert (tmp_path / "sweep_summary.csv").exists() and (tmp_path / "position_tau002.csv").exists()


def test_covariance(capsys, tmp_path, fast_config):
    code, out, _ = run(capsys, "covariance", "--config", fast_config, "--out", tmp_path)
    assert code == 0 and out["discrepancy"] < 1e-3


def test_verify_subset_and_list(capsys, tmp_path):
    code, out, err = run(capsys, "verify", "--out", tmp_path, "--only", "operators.spectrum_spacing",
                         "povm.sinc_kernel")
    assert code == 0 and out["passed"] == 2
    assert err.count("[PASS]") == 2
    code, out, _ = run(capsys, "verify", "--list")
    assert "analysis.covariance" in out["checks"]


def test_verify_unknown_check(capsys, tmp_path):
    code, _, err = run(capsys, "verify", "--out", tmp_path, "--only", "nope")
    assert code == cli.EXIT_CONFIG and "nope" in json.loads(err)["message"]


def test_config_error_exit(capsys, tmp_path):
    bad = tmp_path / "bad.yaml"
    bad.write_text(yaml.safe_dump({"mass": -1}))
    code, out, err = run(capsys, "spectrum", "--config", bad)
    assert code == cli.EXIT_CONFIG and out is None
    assert json.loads(err)["error"] == "config"


def test_io_error_exit(capsys, tmp_path):
    blocker = tmp_path / "blocker"
    blocker.write_text("x")
    code, _, err = run(capsys, "spectrum", "--out", blocker / "sub")
    assert code == cli.EXIT_CONFIG and json.loads(err)["error"] == "io"


def test_numeric_error_exit(capsys, monkeypatch):
    def boom(cfg, args):
        raise ArithmeticError("density below the noise floor")

    monkeypatch.setitem(cli.COMMANDS, "spectrum", boom)
    code, _, err = run(capsys, "spectrum")
    assert code == cli.EXIT_NUMERIC and json.loads(err)["error"] == "numerical"


def test_repeat_runs_byte_identical(capsys, tmp_path, fast_config):
    for d in ("a", "b"):
        assert run(capsys, "position-density", "--config", fast_config, "--out", tmp_path / d)[0] == 0
    assert (tmp_path / "a/position_density.csv").read_bytes() == (tmp_path / "b/position_density.csv").read_bytes()


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "propertime.cli", "verify", "--list"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0 and "povm.tau_drift" in res.stdout


@pytest.mark.slow
def test_full_verify_passes(capsys, tmp_path):
    code, out, err = run(capsys, "verify", "--out", tmp_path)
    assert code == 0, err
    assert out["failed"] == 0
