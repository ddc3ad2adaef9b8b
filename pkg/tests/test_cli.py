"""Command-line harness: exit codes, file contracts, determinism."""

import json
import subprocess
import sys

BASE = [sys.executable, "-m", "kottlerlab"]


def run(*argv, cwd=None):
    return subprocess.run(BASE + list(argv), capture_output=True, text=True, cwd=cwd)


# ------------------------------------------------------------------- model

def test_model_writes_csv_and_json(tmp_path):
    res = run("--out-dir", str(tmp_path), "model", "--mass", "0", "--genus", "2",
              "--r-max", "50")
    assert res.returncode == 0
    lines = (tmp_path / "model_m0.csv").read_text().splitlines()
    assert lines[0] == "r,u,f,W,psi,W0,R_scalar,static_residual_1,static_residual_2"
    first = lines[1].split(",")
    assert first[0] == "1" and first[1] == "0"
    record = json.loads((tmp_path / "model_m0.json").read_text())
    assert record["horizon"]["radius"] == 1.0
    assert record["horizon"]["degenerate"] is False


def test_model_near_critical_horizon(tmp_path):
    res = run("--out-dir", str(tmp_path), "model", "--mass", "-0.19245",
              "--out", "crit")
    assert res.returncode == 0
    record = json.loads((tmp_path / "crit.json").read_text())
    assert abs(record["horizon"]["radius"] - 1 / 3**0.5) < 1e-2


def test_model_rejects_inadmissible_mass(tmp_path):
    res = run("--out-dir", str(tmp_path), "model", "--mass", "-0.5")
    assert res.returncode == 2
    assert "admissible" in res.stderr
    assert not list(tmp_path.iterdir())


def test_no_partial_files_left_behind(tmp_path):
    run("--out-dir", str(tmp_path), "model", "--mass", "0")
    assert not [p for p in tmp_path.iterdir() if p.suffix == ".partial"]


def test_model_determinism(tmp_path):
    run("--out-dir", str(tmp_path / "a"), "model", "--mass", "-0.1")
    run("--out-dir", str(tmp_path / "b"), "model", "--mass", "-0.1")
    assert (tmp_path / "a" / "model_m-0.1.csv").read_bytes() == \
        (tmp_path / "b" / "model_m-0.1.csv").read_bytes()
    assert (tmp_path / "a" / "model_m-0.1.json").read_bytes() == \
        (tmp_path / "b" / "model_m-0.1.json").read_bytes()


# --------------------------------------------------------------- verify-all

def test_verify_all_filtered_family(tmp_path):
    res = run("--out-dir", str(tmp_path), "verify-all", "--only", "bijection")
    assert res.returncode == 0
    reports = json.loads((tmp_path / "reports.json").read_text())
    assert all(r["passed"] for r in reports)
    assert all("bijection" in r["name"] for r in reports)
    assert (tmp_path / "reports.txt").exists()


def test_verify_all_tightened_tolerances_fail(tmp_path):
    res = run("--out-dir", str(tmp_path), "--tolerance-scale", "1e-6",
              "verify-all", "--only", "bochner")
    assert res.returncode == 3
    reports = json.loads((tmp_path / "reports.json").read_text())
    assert any(not r["passed"] for r in reports)  # partial results still written


def test_verify_all_unknown_family(tmp_path):
    res = run("--out-dir", str(tmp_path), "verify-all", "--only", "nonsense")
    assert res.returncode == 2


# -------------------------------------------------------------------- shoot

def test_shoot_writes_profile_and_diagnostics(tmp_path):
    res = run("--out-dir", str(tmp_path), "shoot", "--k", "0.5", "--s-max", "4",
              "--out", "run")
    assert res.returncode == 0
    diag = json.loads((tmp_path / "run.json").read_text())
    assert abs(diag["inferred_mass"] - diag["target_mass"]) < 1e-5
    assert diag["closed_form_sup_error"] < 1e-6
    assert diag["degenerate"] is False
    header = (tmp_path / "run.csv").read_text().splitlines()[0]
    assert header == "s,u,du,rho,drho,inferred_mass,constraint_defect"


def test_shoot_degenerate_flagged(tmp_path):
    res = run("--out-dir", str(tmp_path), "shoot", "--k", "0", "--s-max", "2",
              "--out", "deg")
    assert res.returncode == 0
    assert "degenerate" in res.stdout
    diag = json.loads((tmp_path / "deg.json").read_text())
    assert diag["degenerate"] is True
    assert diag["closed_form_sup_error"] is None


def test_shoot_rejects_bad_gravity(tmp_path):
    assert run("--out-dir", str(tmp_path), "shoot", "--k", "1.5").returncode == 2
    assert run("--out-dir", str(tmp_path), "shoot", "--k", "-0.2").returncode == 2


# -------------------------------------------------------------------- sweep

def test_sweep_mass_pair(tmp_path):
    res = run("--out-dir", str(tmp_path), "sweep", "--mode", "mass-pair",
              "--masses", "0,-0.1")
    assert res.returncode == 0
    lines = (tmp_path / "sweep_mass_pair.csv").read_text().splitlines()
    assert lines[0] == "profile_mass,comparison_mass,check,value"
    assert len(lines) == 1 + 4 * 3  # 2x2 pairs, 3 checks each


def test_sweep_threads_deterministic(tmp_path):
    run("--out-dir", str(tmp_path / "a"), "sweep", "--mode", "k-genus")
    run("--out-dir", str(tmp_path / "b"), "--threads", "4", "sweep",
        "--mode", "k-genus")
    assert (tmp_path / "a" / "sweep_k_genus.csv").read_bytes() == \
        (tmp_path / "b" / "sweep_k_genus.csv").read_bytes()


def test_sweep_gnuplot_script(tmp_path):
    res = run("--out-dir", str(tmp_path), "sweep", "--mode", "k-genus",
              "--k-values", "0.5", "--genus-list", "2,3", "--gnuplot")
    assert res.returncode == 0
    assert "plot" in (tmp_path / "sweep_k_genus.gp").read_text()


def test_sweep_empty_range(tmp_path):
    res = run("--out-dir", str(tmp_path), "sweep", "--mode", "k-genus",
              "--k-values", "")
    assert res.returncode == 2


def test_sweep_rejects_out_of_range_values(tmp_path):
    assert run("--out-dir", str(tmp_path), "sweep", "--mode", "mass-pair",
               "--masses", "0,-0.5").returncode == 2
    assert run("--out-dir", str(tmp_path), "sweep", "--mode", "k-genus",
               "--k-values", "2.0").returncode == 2


# ------------------------------------------------------------ global flags

def test_seedless_rejected(tmp_path):
    res = run("--seedless", "--out-dir", str(tmp_path), "model", "--mass", "0")
    assert res.returncode == 2
    assert "reserved" in res.stderr


def test_config_file_provides_defaults_flags_win(tmp_path):
    conf = tmp_path / "conf.json"
    conf.write_text(json.dumps({"mass": -0.1, "points": 32}))
    res = run("--config", str(conf), "--out-dir", str(tmp_path), "model")
    assert res.returncode == 0
    assert (tmp_path / "model_m-0.1.csv").exists()
    # explicit flag beats the config value
    res2 = run("--config", str(conf), "--out-dir", str(tmp_path), "model",
               "--mass", "-0.05")
    assert res2.returncode == 0
    assert (tmp_path / "model_m-0.05.csv").exists()


def test_config_unknown_key_rejected(tmp_path):
    conf = tmp_path / "conf.json"
    conf.write_text(json.dumps({"bogus": 1}))
    res = run("--config", str(conf), "model", "--mass", "0")
    assert res.returncode == 2
    assert "unknown config keys" in res.stderr


def test_bad_tolerance_scale_rejected(tmp_path):
    res = run("--tolerance-scale", "0", "--out-dir", str(tmp_path),
              "verify-all", "--only", "bijection")
    assert res.returncode == 2


def test_positive_mass_model_emits_nan_pseudoradial_columns(tmp_path):
    res = run("--out-dir", str(tmp_path), "model", "--mass", "0.3", "--out", "pos")
    assert res.returncode == 0
    lines = (tmp_path / "pos.csv").read_text().splitlines()
    assert lines[1].split(",")[4] == "nan"
    # JSON side must stay valid (no bare NaN tokens)
    json.loads((tmp_path / "pos.json").read_text())
