"""Tests for the command-line driver."""

import json
import os
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from els.fixtures import build_fixture
from els.problem import serialize_minimax_problem, serialize_problem

FIXDIR = Path(__file__).resolve().parent.parent / "fixtures"


def run_cli(*args, env_extra=None):
    env = dict(os.environ)
    if env_extra:
        env.update(env_extra)
    return subprocess.run(
        [sys.executable, "-m", "els.cli", *args],
        capture_output=True,
        text=True,
        env=env,
    )


def test_check_conditions_json():
    res = run_cli("check-conditions", "--n", "6", "--p", "2", "--k", "3")
    assert res.returncode == 0
    doc = json.loads(res.stdout)
    assert doc == {
        "n": 6,
        "p": 2,
        "k": 3,
        "beck": True,
        "exact": True,
        "no_local_nonglobal": True,
    }


def test_solve_flags_inexactness(tmp_path):
    out = tmp_path / "report.json"
    res = run_cli("solve", str(FIXDIR / "example-4.1.json"), "--out", str(out))
    assert res.returncode == 0
    doc = json.loads(out.read_text())
    assert abs(doc["relaxation"]["value"]) <= 1e-6
    assert doc["exact_recovery"] is False
    assert doc["reduction"]["attempted"] and not doc["reduction"]["succeeded"]
    assert doc["conditions"]["exact"] is False


def test_solve_with_oracle_reports_gap(tmp_path):
    out = tmp_path / "report.json"
    res = run_cli(
        "solve", str(FIXDIR / "example-4.1.json"), "--with-oracle", "--restarts", "8",
        "--out", str(out),
    )
    assert res.returncode == 0
    doc = json.loads(out.read_text())
    assert doc["oracle"]["value"] == pytest.approx(1.0, abs=1e-8)


def test_certify_local_nonglobal_point(tmp_path):
    point = tmp_path / "neg.json"
    point.write_text('{"X": [[0.0], [-1.0]]}')
    res = run_cli("certify", str(FIXDIR / "example-5.1.json"), "--point", str(point))
    assert res.returncode == 0
    doc = json.loads(res.stdout)
    assert doc["certificate"]["global"] is False
    assert doc["certificate"]["Lambda"][0][0] == pytest.approx(-2.0, abs=1e-8)

    point.write_text('{"X": [[0.0], [1.0]]}')
    res = run_cli("certify", str(FIXDIR / "example-5.1.json"), "--point", str(point))
    doc = json.loads(res.stdout)
    assert doc["certificate"]["global"] is True
    assert doc["certificate"]["route"] == "lemma-5.1"


def test_relax_exit_codes(tmp_path):
    bad = tmp_path / "infeasible.json"
    bad.write_text(
        json.dumps(
            {
                "n": 2,
                "p": 1,
                "A0": [[1.0, 0.0]],
                "constraints": [{"A": [[1.0, 0.0]], "lower": 2.0, "upper": "inf"}],
            }
        )
    )
    res = run_cli("relax", str(bad))
    assert res.returncode == 1

    res = run_cli("relax", str(FIXDIR / "example-4.3.json"))
    assert res.returncode == 0
    assert json.loads(res.stdout)["value"] == pytest.approx(-2.0, abs=1e-6)


def test_usage_errors(tmp_path):
    res = run_cli("solve", str(tmp_path / "missing.json"))
    assert res.returncode == 3
    assert "error" in res.stderr

    broken = tmp_path / "broken.json"
    broken.write_text("{nope")
    res = run_cli("solve", str(broken))
    assert res.returncode == 3

    res = run_cli("frobnicate")
    assert res.returncode == 3


def test_reports_byte_identical_modulo_timings(tmp_path):
    out1, out2 = tmp_path / "r1.json", tmp_path / "r2.json"
    for out in (out1, out2):
        res = run_cli("solve", str(FIXDIR / "example-4.2.json"), "--seed", "5", "--out", str(out))
        assert res.returncode == 0
    d1, d2 = json.loads(out1.read_text()), json.loads(out2.read_text())
    d1.pop("timings"), d2.pop("timings")
    assert json.dumps(d1) == json.dumps(d2)


def test_seed_env_override(tmp_path):
    out = tmp_path / "r.json"
    res = run_cli(
        "solve", str(FIXDIR / "example-5.1.json"), "--out", str(out),
        env_extra={"ELS_SEED": "31"},
    )
    assert res.returncode == 0
    assert json.loads(out.read_text())["config"]["seed"] == 31


def test_oracle_command():
    res = run_cli("oracle", str(FIXDIR / "example-4.3.json"), "--restarts", "8")
    assert res.returncode == 0
    assert json.loads(res.stdout)["value"] == pytest.approx(-1.0, abs=1e-8)


def test_range_command(tmp_path):
    query = tmp_path / "query.json"
    query.write_text(
        json.dumps(
            {
                "matrices": [[[1.0, 0.0]], [[0.0, 1.0]]],
                "targets": [[-0.3, -0.3], [0.6, 0.8]],
            }
        )
    )
    res = run_cli("range", str(query))
    assert res.returncode == 0
    rows = json.loads(res.stdout)["rows"]
    assert rows[0]["g2_feasible"] and not rows[0]["g1_recovered"]
    assert rows[1]["g2_feasible"] and rows[1]["g1_recovered"]
    assert rows[1]["residual"] <= 1e-6


def test_minimax_command(tmp_path):
    mm = build_fixture("dispersion", w=[1.0, 1.0], d=[[1.0, 0.0], [-1.0, 0.0]])
    path = tmp_path / "mm.json"
    path.write_text(serialize_minimax_problem(mm))
    res = run_cli("minimax", str(path))
    assert res.returncode == 0
    doc = json.loads(res.stdout)
    assert doc["value"] == pytest.approx(-2.0, abs=1e-6)
    assert doc["exact"] is True


def test_batch_continues_past_failures(tmp_path):
    d = tmp_path / "batch"
    d.mkdir()
    (d / "a.json").write_text(serialize_problem(build_fixture("example-5.1")))
    (d / "b.json").write_text("{broken")
    (d / "c.json").write_text(serialize_problem(build_fixture("example-4.1")))
    res = run_cli("batch", str(d))
    assert res.returncode == 0
    rows = json.loads(res.stdout)["instances"]
    assert [r["file"] for r in rows] == ["a.json", "b.json", "c.json"]
    assert rows[0]["status"] == "optimal"
    assert rows[1]["status"] == "error"
    assert rows[2]["status"] == "optimal"
