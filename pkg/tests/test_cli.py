import json
import math
import shutil
import subprocess
import sys

import numpy as np
import pytest

from periodtwo import io
from periodtwo.cli import main


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture
def glued_csv(tmp_path):
    out = tmp_path / "w.csv"
    assert run("glue", "--eta", "periodic:01", "--window=-4,4", "--out", out) == 0
    return out


def test_glue_csv_and_labeling(glued_csv):
    t, w = io.read_csv(glued_csv, ("t", "w"))
    assert t.size == 8193
    assert w[np.searchsorted(t, 2.5)] == 1.0
    labeling = json.loads(glued_csv.with_suffix(".labeling.json").read_text())
    assert {k: labeling[k] for k in ("t1", "xi", "p", "q", "s1", "up_parity")} == {
        "t1": 1.5, "xi": 2.0, "p": 0.0, "q": 1.0, "s1": 2.5, "up_parity": 0,
    }


def test_glue_constant_zero_is_one_periodic(tmp_path):
    out = tmp_path / "z.csv"
    assert run("glue", "--eta", "periodic:0", "--out", out) == 0
    _, w = io.read_csv(out)
    assert np.array_equal(w[1024:], w[:-1024])


def test_glue_degenerate_seed(tmp_path, capsys):
    sc = tmp_path / "zero.json"
    sc.write_text(json.dumps({"field": "0", "seed": "0"}))
    assert run("glue", "--scenario", sc, "--eta", "periodic:0", "--out", tmp_path / "o.csv") == 2
    assert "degenerate: 1-periodic seed" in capsys.readouterr().err


@pytest.mark.parametrize(
    "argv",
    [
        ["glue", "--eta", "periodic:01"],
        ["glue", "--eta", "periodic:2", "--out", "x.csv"],
        ["glue", "--eta", "periodic:01", "--window", "4,-4", "--out", "x.csv"],
        ["glue", "--scenario", "missing.json", "--eta", "periodic:0", "--out", "x.csv"],
        ["verify", "--suite", "nope"],
        ["entropy", "--n", "0"],
        ["reduce", "--out", "x.csv"],
        ["frobnicate"],
        [],
    ],
)
def test_usage_errors_exit_one(tmp_path, monkeypatch, argv):
    monkeypatch.chdir(tmp_path)
    assert run(*argv) == 1


def test_bad_scenario_key(tmp_path):
    sc = tmp_path / "s.json"
    sc.write_text(json.dumps({"field": {"builtin": "bump"}, "seed": {"builtin": "bump"}, "extra": 1}))
    assert run("glue", "--scenario", sc, "--eta", "periodic:0", "--out", tmp_path / "o.csv") == 1


def test_grid_step_env(tmp_path, monkeypatch):
    monkeypatch.setenv("BEBUTOV_GRID_STEP", "1/256")
    out = tmp_path / "w.csv"
    assert run("glue", "--eta", "periodic:01", "--out", out) == 0
    t, _ = io.read_csv(out)
    assert t.size == 8 * 256 + 1
    monkeypatch.setenv("BEBUTOV_GRID_STEP", "zero")
    assert run("glue", "--eta", "periodic:01", "--out", out) == 1


def test_reduce_three(tmp_path):
    out = tmp_path / "r.csv"
    assert run("reduce", "--instance", "m3", "--out", out) == 0
    trace = json.loads(out.with_suffix(".trace.json").read_text())
    assert trace["period_out"] == 2 and len(trace["splices"]) == 1
    assert {"j", "k", "t_star", "junction_residual"} <= set(trace["splices"][0])
    t, v = io.read_csv(out, ("t", "value"))
    assert t.size == 2048


def test_reduce_five_two_entries(tmp_path):
    out = tmp_path / "r.csv"
    assert run("reduce", "--instance", "m5", "--out", out) == 0
    assert len(json.loads(out.with_suffix(".trace.json").read_text())["splices"]) == 2


def test_reduce_two_periodic_input_is_precondition_error(tmp_path):
    out = tmp_path / "r.csv"
    assert run("reduce", "--instance", "m3", "--out", out) == 0
    assert run("reduce", "--input", out, "--period", 2, "--out", tmp_path / "rr.csv") == 1


def test_reduce_csv_input(tmp_path):
    src = tmp_path / "u.csv"
    t = np.arange(4096) / 1024
    u = np.array([0.9, 0.1, 0.6, 0.3])[np.floor(t).astype(int)] * np.sin(np.pi * t) ** 2
    io.write_csv(src, ("t", "value"), t, u)
    assert run("reduce", "--input", src, "--period", 4, "--out", tmp_path / "r.csv") == 0


def test_reduce_one_periodic_input(tmp_path):
    src = tmp_path / "u.csv"
    t = np.arange(3072) / 1024
    io.write_csv(src, ("t", "value"), t, 0.5 * np.sin(np.pi * t) ** 2)
    assert run("reduce", "--input", src, "--period", 3, "--out", tmp_path / "r.csv") == 2


def test_verify_entropy(capsys):
    assert run("verify", "--suite", "entropy", "--n", 10) == 0
    rep = json.loads(capsys.readouterr().out)["entropy"]
    assert rep["h_estimate"] == pytest.approx(math.log(2), abs=1e-12)
    assert rep["count"] == 1024


def test_verify_conjugacy_writes_reports(tmp_path):
    assert run("verify", "--suite", "conjugacy", "--out", tmp_path / "rep") == 0
    rep = json.loads((tmp_path / "rep" / "conjugacy.json").read_text())
    assert rep["max_defect"] == 0.0


def test_verify_residual_input(glued_csv, capsys):
    assert run("verify", "--suite", "residual", "--input", glued_csv) == 0
    corrupt = glued_csv.with_name("bad.csv")
    t, w = io.read_csv(glued_csv)
    flip = (t >= 0.25) & (t < 1.0)
    w = np.where(flip, np.sin(np.pi * t) ** 2 - w, w)
    io.write_csv(corrupt, ("t", "w"), t, w)
    shutil.copy(glued_csv.with_suffix(".labeling.json"), corrupt.with_suffix(".labeling.json"))
    capsys.readouterr()
    assert run("verify", "--suite", "residual", "--input", corrupt) == 2
    assert "residual-input" in capsys.readouterr().err


@pytest.mark.parametrize("suite", ["coin-tossing", "cancellation", "residual"])
def test_verify_other_suites(suite):
    assert run("verify", "--suite", suite) == 0


def test_distance_reports(capsys):
    assert run("distance", "--a", "periodic:0", "--b", "window:0:1:0") == 0
    rep = json.loads(capsys.readouterr().out)
    assert set(rep) == {"rho", "tail_bound", "M", "grid_step"}
    assert rep["rho"] > 0
    assert run("distance", "--a", "periodic:0", "--b", "window:0:1:0", "--metric", "dhat") == 0
    assert json.loads(capsys.readouterr().out)["dhat"] == 0.5


def test_entropy_command(capsys):
    assert run("entropy", "--n", 3) == 0
    assert json.loads(capsys.readouterr().out)["count"] == 8
    assert run("entropy", "--n", 3, "--eps", 1.0) == 1
    assert run("entropy", "--n", 3, "--eps", 1.0, "--allow-uncertified") == 0
    assert json.loads(capsys.readouterr().out)["count"] == 1


def test_witness_and_devaney_commands(capsys):
    assert run("witness-liyorke", "--N", 256) == 0
    assert run("transitivity", "--u", "11", "--v", "00") == 0
    assert run("density", "--eta", "rule:dense", "--m", 3) == 0
    out = capsys.readouterr().out
    assert out.count('"verdict": "pass"') == 3


def test_outputs_are_deterministic(tmp_path):
    for name in ("a", "b"):
        assert run("glue", "--eta", "rule:random:3", "--out", tmp_path / f"{name}.csv") == 0
        assert run("verify", "--suite", "cancellation", "--out", tmp_path / name) == 0
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    for rep in (tmp_path / "a").iterdir():
        assert rep.read_bytes() == (tmp_path / "b" / rep.name).read_bytes()


def test_console_script(tmp_path):
    exe = shutil.which("periodtwo")
    cmd = [exe] if exe else [sys.executable, "-m", "periodtwo.cli"]
    res = subprocess.run(cmd + ["glue", "--eta", "periodic:01", "--out", str(tmp_path / "w.csv")], capture_output=True)
    assert res.returncode == 0
    res = subprocess.run(cmd + ["verify", "--suite", "bogus"], capture_output=True, text=True)
    assert res.returncode == 1 and "usage" in res.stderr
