"""End-to-end runs of the command line driver, in process."""

import numpy as np
import pytest

from bvmix.cli import main, parse_config_text, resolve_config, ConfigError


def run(*argv):
    return main(list(argv))


# --- config plumbing --------------------------------------------------


def test_parse_config_text():
    cfg = parse_config_text("# comment\nt = 2.0\n\nflow = zero  \n")
    assert cfg == {"t": "2.0", "flow": "zero"}


def test_parse_config_rejects_duplicates_and_junk():
    with pytest.raises(ConfigError):
        parse_config_text("t = 1\nt = 2\n")
    with pytest.raises(ConfigError):
        parse_config_text("just some words\n")


def test_unknown_override_key(tmp_path, capsys):
    assert run("simulate", "--out", str(tmp_path / "o"), "--override", "nonsense=1") == 2
    assert "unknown key 'nonsense'" in capsys.readouterr().err


def test_unknown_config_key(tmp_path, capsys):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("warp_speed = 9\n")
    assert run("simulate", "--config", str(cfg), "--out", str(tmp_path / "o")) == 2
    assert "unknown key" in capsys.readouterr().err


def test_scenario_mismatch(tmp_path, capsys):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("scenario = bounds5\n")
    assert run("simulate", "--config", str(cfg), "--out", str(tmp_path / "o")) == 2
    err = capsys.readouterr().err
    assert "config says 'bounds5'" in err


def test_bad_flow_and_grid(tmp_path, capsys):
    assert run("simulate", "--out", str(tmp_path / "a"),
               "--override", "flow=warp(1)") == 2
    assert run("simulate", "--out", str(tmp_path / "b"), "--grid", "31x31") == 2
    assert run("simulate", "--out", str(tmp_path / "c"), "--grid", "16") == 2
    capsys.readouterr()


def test_bounds_grid_cap(tmp_path, capsys):
    assert run("bounds5", "--out", str(tmp_path / "o"), "--grid", "128x128") == 2
    assert "at most 64 nodes" in capsys.readouterr().err


def test_override_beats_config(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("flow = sine_shear(0.5,1.0)\nt = 1.0\n")
    raw = resolve_config("simulate", str(cfg), None, None, None,
                         ["flow=zero", "t=2.0"])
    assert raw["flow"] == "zero"
    assert raw["t"] == "2.0"


def test_no_config_uses_scenario_defaults():
    raw = resolve_config("pigeonhole", None, None, None, None, [])
    assert raw["flow"] == "zero"
    assert raw["grid"] == "128x128"


# --- scenario runs ----------------------------------------------------


def test_simulate_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert run("simulate", "--out", str(out), "--override", "flow=zero") == 0
    capsys.readouterr()
    assert (a / "trace.csv").read_bytes() == (b / "trace.csv").read_bytes()
    assert ((a / "simulate_hminus1.dat").read_bytes()
            == (b / "simulate_hminus1.dat").read_bytes())
    # a resting tracer keeps its norm: one value repeated over 33 rows
    rows = (a / "trace.csv").read_text().splitlines()
    assert rows[0] == "t,hminus1"
    vals = {r.split(",")[1] for r in rows[1:]}
    assert len(rows) == 34 and len(vals) == 1
    manifest = (a / "manifest.txt").read_text()
    assert manifest.startswith("status = ok")
    assert "# resolved configuration" in manifest


def test_bounds5_run(tmp_path, capsys):
    out = tmp_path / "o"
    assert run("bounds5", "--out", str(out)) == 0
    stdout = capsys.readouterr().out
    assert "identity residual" in stdout
    body = (out / "bounds.csv").read_text()
    resid_lines = [ln for ln in body.splitlines() if "identity_residual" in ln]
    assert resid_lines
    assert float(resid_lines[0].split("=")[1]) < 1e-10
    names = [ln.split(",")[0] for ln in body.splitlines()
             if ln and not ln.startswith(("#", "name"))]
    assert names == ["I1", "I2", "I3", "I4", "I5"]
    dat = (out / "bounds5_rhs.dat").read_text().splitlines()
    assert dat[0].startswith("#")


def test_bounds7_run(tmp_path, capsys):
    out = tmp_path / "o"
    assert run("bounds7", "--out", str(out)) == 0
    capsys.readouterr()
    names = [ln.split(",")[0] for ln in (out / "bounds.csv").read_text().splitlines()
             if ln and not ln.startswith(("#", "name"))]
    assert names == ["I1", "I2", "I3", "I4", "I5", "I3p", "I4p", "I5p", "R1", "R2"]


def test_pigeonhole_default_run(tmp_path, capsys):
    out = tmp_path / "o"
    assert run("pigeonhole", "--out", str(out)) == 0
    stdout = capsys.readouterr().out
    assert "certificate" in stdout
    for name in ("selection.csv", "bands.csv", "certificate.csv",
                 "pigeonhole_l2bands.dat", "manifest.txt"):
        assert (out / name).exists(), name
    bands = (out / "bands.csv").read_text().splitlines()
    assert bands[0] == "side,rung,outer,inner,energy,status"
    sides = {ln.split(",")[0] for ln in bands[1:]}
    assert sides == {"velocity", "test_function"}
    cert = dict(zip(*(ln.split(",") for ln in
                      (out / "certificate.csv").read_text().splitlines())))
    assert float(cert["lam"]) == 0.0
    assert int(cert["unreachable"]) == 0


def test_pigeonhole_runtime_failure_writes_manifest(tmp_path, capsys):
    out = tmp_path / "o"
    code = run("pigeonhole", "--out", str(out), "--grid", "32x32",
               "--override", "flow=sine_shear(0.3,1.0)")
    assert code == 3
    assert "runtime error" in capsys.readouterr().err
    manifest = (out / "manifest.txt").read_text()
    assert manifest.startswith("status = error")
    assert "no reachable velocity band" in manifest


def test_mollifier_check_run(tmp_path, capsys):
    out = tmp_path / "o"
    assert run("mollifier_check", "--out", str(out), "--override", "trials=5") == 0
    stdout = capsys.readouterr().out
    assert "max cancellation residual" in stdout
    rows = (out / "residuals.csv").read_text().splitlines()
    assert rows[0] == "trial,lam,residual"
    assert len(rows) == 6
    assert all(float(r.split(",")[2]) < 1e-8 for r in rows[1:])
    decay = (out / "decay.csv").read_text().splitlines()
    assert len(decay) > 1


def test_vanishing_run(tmp_path, capsys):
    out = tmp_path / "o"
    assert run("vanishing", "--out", str(out)) == 0
    capsys.readouterr()
    rows = (out / "vanishing.csv").read_text().splitlines()
    assert rows[0].startswith("kappa,achieved")
    assert len(rows) == 4  # default ladder has three levels
    worst = (out / "vanishing_worst.dat").read_text().splitlines()
    assert any(not ln.startswith("#") for ln in worst)


def test_verify_subset(tmp_path, capsys):
    out = tmp_path / "o"
    assert run("verify", "--out", str(out), "--override", "criteria=4") == 0
    stdout = capsys.readouterr().out
    assert "criterion 4" in stdout and "PASS" in stdout
    rows = (out / "verify.csv").read_text().splitlines()
    assert rows[0] == "criterion,title,passed"
    assert rows[1].split(",")[0] == "4"
    assert rows[1].split(",")[2] == "1"


def test_seed_changes_random_datum(tmp_path, capsys):
    outs = []
    for seed in ("1", "2"):
        out = tmp_path / seed
        assert run("simulate", "--out", str(out), "--seed", seed,
                   "--override", "flow=zero", "--override", "datum=random()") == 0
        outs.append((out / "trace.csv").read_text())
    capsys.readouterr()
    assert outs[0] != outs[1]
