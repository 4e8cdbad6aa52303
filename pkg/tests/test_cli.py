import csv
import shutil
import subprocess
import sys

import numpy as np
import pytest
import yaml

from laxhvac.baselines.lp import parse_lp_text
from laxhvac.cli import main
from laxhvac.config import fixture_scenario, load_scenario
from laxhvac.env import Trace
from laxhvac.rl.ddpg import LearningCurve


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


@pytest.fixture
def small_config(tmp_path):
    """Fixture scenario cut to 3 units and short episodes, written as YAML."""
    from dataclasses import replace
    from laxhvac.config import dump_scenario

    sc = fixture_scenario(n_units=3)
    sc = replace(sc, episode_length=24, ddpg=replace(sc.ddpg, hidden=(16, 16), episodes=2))
    path = tmp_path / "small.yaml"
    dump_scenario(sc, path)
    return path


def test_simulate_zero_policy_has_zero_tec(tmp_path, small_config, capsys):
    out = tmp_path / "sim"
    assert main(["simulate", "--config", str(small_config), "--policy", "zero",
                 "--out", str(out)]) == 0
    rows = read_rows(out / "summary.csv")
    assert len(rows) == 1 and float(rows[0]["TEC"]) == 0.0
    tr = Trace.from_csv(out / "trace.csv")
    assert len(tr) == 24 and np.all(tr.u == 0)
    assert load_scenario(out / "config.yaml") == load_scenario(small_config)


def test_simulate_constant_policy(tmp_path, small_config):
    out = tmp_path / "sim"
    assert main(["simulate", "--config", str(small_config), "--policy", "constant:3",
                 "--out", str(out)]) == 0
    tr = Trace.from_csv(out / "trace.csv")
    assert np.all(tr.P == 3.0)


def test_train_then_simulate_checkpoint(tmp_path, small_config):
    out = tmp_path / "train"
    assert main(["train", "--config", str(small_config), "--episodes", "2",
                 "--out", str(out)]) == 0
    curve = LearningCurve.from_csv(out / "learning_curve.csv")
    assert curve.episode == [0, 1]
    assert main(["simulate", "--config", str(small_config), "--policy",
                 str(out / "checkpoint.npz"), "--out", str(tmp_path / "sim")]) == 0
    assert main(["train", "--config", str(small_config), "--method", "centralized",
                 "--out", str(tmp_path / "cen")]) == 0
    assert main(["simulate", "--config", str(small_config), "--policy",
                 str(tmp_path / "cen" / "checkpoint.npz"), "--out", str(tmp_path / "sim2")]) == 0
    rows = read_rows(tmp_path / "sim2" / "summary.csv")
    assert rows[0]["method"] == "centralized"


def test_evaluate_emits_three_by_two_table(tmp_path, capsys):
    out = tmp_path / "ev"
    assert main(["evaluate", "--episodes", "1", "--out", str(out)]) == 0
    rows = read_rows(out / "results.csv")
    assert [r["method"] for r in rows] == ["MPC", "Proposed", "Centralized"]
    assert all(set(r) == {"method", "ATD", "TEC"} for r in rows)
    for m in ("mpc", "proposed", "centralized"):
        assert len(Trace.from_csv(out / f"trace_{m}.csv")) == 96
    printed = capsys.readouterr().out
    assert "MPC" in printed and "Centralized" in printed


def test_mpc_command(tmp_path, small_config):
    out = tmp_path / "mpc"
    assert main(["mpc", "--config", str(small_config), "--window", "6", "--out", str(out)]) == 0
    assert yaml.safe_load((out / "config.yaml").read_text())["mpc"]["window"] == 6
    assert read_rows(out / "summary.csv")[0]["method"] == "MPC"


def test_export_lp_reparses(tmp_path, small_config):
    path = tmp_path / "lp" / "mpc.lp"
    assert main(["export-lp", "--config", str(small_config), "--horizon", "5",
                 "--out", str(path)]) == 0
    lp = parse_lp_text(path)
    assert lp.meta == {} and lp.n_vars == 7 * 3 * 5


def test_verify_subset(capsys):
    assert main(["verify", "--only", "zeta", "abstraction", "--n", "50"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert len(out) == 2 and all(line.startswith("[PASS]") for line in out)


def test_config_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.yaml"
    bad.write_text("fleet:\n  - {a: 0.1, b: oops, x_lo: 19, x_hi: 23, x_target: 21, u_max: 4}\n")
    assert main(["simulate", "--config", str(bad), "--out", str(tmp_path / "o")]) == 2
    assert "fleet[0].b" in capsys.readouterr().err


def test_missing_config_exit_code(tmp_path, capsys):
    assert main(["simulate", "--config", str(tmp_path / "none.yaml"),
                 "--out", str(tmp_path / "o")]) == 2


def test_seeded_cli_determinism(tmp_path, small_config):
    for d in ("a", "b"):
        assert main(["train", "--config", str(small_config), "--seed", "5",
                     "--out", str(tmp_path / d)]) == 0
    for f in ("learning_curve.csv", "config.yaml"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


@pytest.mark.skipif(shutil.which("laxhvac") is None, reason="console script not installed")
def test_console_script(tmp_path):
    r = subprocess.run(["laxhvac", "simulate", "--out", str(tmp_path)], capture_output=True,
                       text=True)
    assert r.returncode == 0, r.stderr
    assert "TEC" in r.stdout


def test_module_invocation_help():
    r = subprocess.run([sys.executable, "-m", "laxhvac.cli", "--help"], capture_output=True,
                       text=True)
    assert r.returncode == 0 and "export-lp" in r.stdout
