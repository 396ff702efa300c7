import json
import subprocess
import sys

import numpy as np
import pytest

from opfactor import cli
from opfactor.io import read_certificate, write_matrix


def run(*args):
    return cli.main([str(a) for a in args])


@pytest.fixture
def identity_files(tmp_path):
    t, b = tmp_path / "T.csv", tmp_path / "B.csv"
    write_matrix(t, np.eye(2))
    write_matrix(b, np.eye(2))
    return t, b


def test_check_identity(identity_files, tmp_path):
    t, b = identity_files
    out = tmp_path / "c.json"
    assert run("check", "--mode", "sebestyen", "--t", t, "--b", b, "--out", out) == 0
    assert read_certificate(out).payload["lambda_min"] == pytest.approx(1.0)
    assert run("verify", out) == 0


def test_douglas_rank_deficient_exit_2(tmp_path):
    t, b, out = tmp_path / "T.csv", tmp_path / "B.csv", tmp_path / "c.json"
    write_matrix(t, np.eye(2))
    write_matrix(b, np.diag([1.0, 0.0]))
    assert run("check", "--mode", "douglas", "--t", t, "--b", b, "--out", out) == 2
    cf = read_certificate(out)
    assert cf.verdict == "infeasible" and cf.witness["column"] == 1
    # the witness itself verifies
    assert run("verify", out) == 0


@pytest.mark.parametrize("mode", ["sebestyen", "reversed"])
def test_infeasible_witness_verifies(mode, tmp_path):
    t, b, out = tmp_path / "T.csv", tmp_path / "B.csv", tmp_path / "c.json"
    write_matrix(t, np.eye(2))
    write_matrix(b, np.diag([1.0, -1.0]))
    assert run("check", "--mode", mode, "--t", t, "--b", b, "--out", out) == 2
    assert run("verify", out) == 0


def test_forged_infeasible_verdict_fails(identity_files, tmp_path):
    t, b = identity_files
    bad_b = tmp_path / "Bad.csv"
    write_matrix(bad_b, np.diag([1.0, -1.0]))
    out = tmp_path / "c.json"
    run("check", "--mode", "sebestyen", "--t", t, "--b", bad_b, "--out", out)
    d = json.loads(out.read_text())
    d["b_matrix"] = json.loads(json.dumps({"rows": 2, "cols": 2, "data": [[1, 0], [0, 0], [0, 0], [1, 0]]}))
    out.write_text(json.dumps(d))
    assert run("verify", out) == 3


def test_unconstrained_exit_0(tmp_path):
    t, b, out = tmp_path / "T.csv", tmp_path / "B.csv", tmp_path / "c.json"
    write_matrix(t, np.eye(2))
    write_matrix(b, np.zeros((2, 2)))
    assert run("check", "--mode", "reversed", "--t", t, "--b", b, "--out", out) == 0
    assert read_certificate(out).verdict == "unconstrained"
    assert run("verify", out) == 0


def test_missing_file(tmp_path, identity_files):
    t, _ = identity_files
    assert run("check", "--mode", "sebestyen", "--t", t, "--b", tmp_path / "nope.csv", "--out", tmp_path / "c.json") == 1


def test_empty_certificate(tmp_path):
    p = tmp_path / "empty.json"
    p.write_text("")
    assert run("verify", p) == 1
    assert run("verify", tmp_path / "missing.json") == 1


def test_usage_errors(tmp_path):
    assert run("check", "--mode", "bogus") == 1
    assert run() == 1
    assert run("gen", "--kind", "random", "--n", "0", "--t", tmp_path / "a.csv", "--b", tmp_path / "b.csv") == 1
    assert run("scale", "--n", "8,4") == 1
    assert run("scale", "--n", "x") == 1


def test_shape_mismatch_exit_1(tmp_path):
    t, b = tmp_path / "T.csv", tmp_path / "B.csv"
    write_matrix(t, np.eye(2))
    write_matrix(b, np.eye(3))
    assert run("check", "--mode", "sebestyen", "--t", t, "--b", b, "--out", tmp_path / "c.json") == 1


def test_tamper_exit_3(tmp_path):
    t, b, out = tmp_path / "T.json", tmp_path / "B.json", tmp_path / "c.json"
    assert run("gen", "--kind", "forward-feasible", "--n", 4, "--seed", 5, "--t", t, "--b", b) == 0
    assert run("check", "--mode", "sebestyen", "--t", t, "--b", b, "--out", out) == 0
    d = json.loads(out.read_text())
    d["certificate"]["factor_x"]["data"][5][0] += 1e-2
    out.write_text(json.dumps(d))
    assert run("verify", out) == 3


def test_env_tolerance(identity_files, tmp_path, monkeypatch):
    t, b = identity_files
    out = tmp_path / "c.json"
    monkeypatch.setenv("OPFACTOR_TOL", "1e-6,1e-9,1e-5")
    assert run("check", "--mode", "sebestyen", "--t", t, "--b", b, "--out", out) == 0
    assert read_certificate(out).tolerance.residual_rel == 1e-5
    # the flag wins over the environment
    assert run("check", "--mode", "sebestyen", "--t", t, "--b", b, "--tol", "1e-7", "--out", out) == 0
    tol = read_certificate(out).tolerance
    assert tol.eig_rel == 1e-7 and tol.residual_rel == 1e-8
    monkeypatch.setenv("OPFACTOR_TOL", "junk")
    assert run("check", "--mode", "sebestyen", "--t", t, "--b", b, "--out", out) == 1


def test_gen_truth_and_variant(tmp_path):
    t, b, x = tmp_path / "T.csv", tmp_path / "B.csv", tmp_path / "X.csv"
    assert run("gen", "--kind", "forward-feasible", "--n", 3, "--t", t, "--b", b, "--truth", x) == 0
    assert x.exists()
    assert run("gen", "--kind", "difference-operator", "--n", 4, "--variant", "mass", "--t", t, "--b", b) == 0


def test_scale_csv(tmp_path, capsys):
    out = tmp_path / "s.csv"
    assert run("scale", "--n", "4,8", "--out", out) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "n,lambda_min,x_norm,m_max,douglas_lambda" and len(lines) == 3
    assert run("scale", "--n", "4") == 0
    assert capsys.readouterr().out.count("\n") == 2


def test_suite_command(capsys):
    assert run("suite", "--seed", 3, "--count", 4) == 0
    assert "0 failures" in capsys.readouterr().out


def test_module_entry_point(tmp_path):
    p = subprocess.run([sys.executable, "-m", "opfactor", "verify", str(tmp_path / "x.json")], capture_output=True)
    assert p.returncode == 1


@pytest.mark.parametrize("mode", ["sebestyen", "reversed", "douglas"])
def test_forged_witness_vector_fails(mode, tmp_path):
    t, b, out = tmp_path / "T.csv", tmp_path / "B.csv", tmp_path / "c.json"
    write_matrix(t, np.eye(2))
    write_matrix(b, np.diag([1.0, -1.0]) if mode != "douglas" else np.diag([1.0, 0.0]))
    assert run("check", "--mode", mode, "--t", t, "--b", b, "--out", out) == 2
    d = json.loads(out.read_text())
    # e1 is a direction where the form is positive and inside ran B
    d["witness"]["vector"]["data"] = [[1.0, 0.0], [0.0, 0.0]]
    if mode == "douglas":
        d["witness"]["column"] = 0
    out.write_text(json.dumps(d))
    assert run("verify", out) == 3
