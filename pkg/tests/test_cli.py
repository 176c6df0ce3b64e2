import json
import subprocess
import sys

import mpmath
import pytest

from qdiffeq.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_classify(capsys):
    code, out, _ = run(capsys, "classify", "q*z*S^2 - S + 1")
    assert code == 0 and "irregular" in out
    code, out, _ = run(capsys, "classify", "(1-S)^2 - z*S")
    assert code == 0 and "\nregular singular" in out


def test_polygon_formats(capsys):
    code, out, _ = run(capsys, "polygon", "q*z*S^2 - S + 1", "--format", "json")
    assert code == 0
    assert [s["slope"] for s in json.loads(out)["segments"]] == ["-1", "0"]
    code, out, _ = run(capsys, "polygon", "q*z*S^2 - S + 1", "--format", "svg")
    assert out.lstrip().startswith("<svg")
    code, out, _ = run(capsys, "polygon", "q*z*S^2 - S + 1")
    assert "slope -1, length 1" in out


def test_solve_text_and_csv(capsys):
    code, out, _ = run(capsys, "solve", "z*S^2 - 1", "--precision", "16")
    assert code == 0 and "theta^(-1/2)" in out
    code, out, _ = run(capsys, "solve", "(1-S)^2 - z", "--format", "csv", "--truncation", "5")
    rows = out.strip().splitlines()
    assert rows[0].startswith("solution") and len(rows) > 5


@pytest.mark.parametrize("precision", ["16", "50"])
def test_solve_then_verify_from_file(tmp_path, capsys, precision):
    path = tmp_path / "sols.json"
    code, _, _ = run(capsys, "solve", "q*z*S^2 - S + 1", "--json", "--precision", precision, "--out", str(path))
    assert code == 0
    code, from_file, _ = run(capsys, "verify", "--solutions", str(path), "--json", "--precision", precision)
    assert code == 0
    code, direct, _ = run(capsys, "verify", "q*z*S^2 - S + 1", "--json", "--precision", precision)
    assert json.loads(from_file) == json.loads(direct)
    reports = json.loads(direct)
    assert reports[0]["guaranteed_order"] != "0"
    assert {"solution_index", "residual_max_abs", "guaranteed_order", "growth"} <= set(reports[0])


def _jacobi_character(q, z, lam):
    # theta(z) = jtheta(3, x, q^(-1/2)) with exp(2ix) = q^(-1/2) z
    t = mpmath.mpf(q) ** -0.5
    th = lambda w: mpmath.jtheta(3, mpmath.log(t * w) / 2j, t)
    return complex(th(z) / th(z / lam)).real


def test_eval(capsys):
    code, out, _ = run(capsys, "eval", "eq", "--z", "0.5", "--lambda", "q", "--q", "2", "--precision", "16")
    assert code == 0 and complex(out.strip().replace(" ", "")) == pytest.approx(0.25)
    code, out, _ = run(capsys, "eval", "eq", "--z", "0.5", "--lambda", "q^(1/2)", "--json", "--precision", "16")
    assert code == 0 and json.loads(out)["re"] == pytest.approx(_jacobi_character(2, 0.5, 2 ** 0.5), rel=1e-12)
    code, out, _ = run(capsys, "eval", "lq", "--z", "1", "--q", "2")
    assert code == 0 and "-0.5" in out


def test_exit_codes(capsys):
    code, _, err = run(capsys, "classify", "1 - S^")
    assert code == 2 and "^" in err
    code, _, _ = run(capsys, "classify", "1 - S", "--q", "0.5")
    assert code == 3
    code, _, _ = run(capsys, "classify", "1 - S", "--q", "banana")
    assert code == 3
    code, _, _ = run(capsys, "verify", "--solutions", "/nonexistent/file.json")
    assert code == 3


def test_examples_list_and_run(capsys):
    code, out, _ = run(capsys, "examples", "list")
    assert code == 0 and "ramanujan" in out and "quintic" in out
    code, out, _ = run(capsys, "examples", "run", "ramanujan", "slope-minus-half", "--precision", "16")
    assert code == 0 and out.count("PASS") >= 2


def test_fixture_file(tmp_path, capsys):
    good = {"name": "geometric", "operator": "(1-S) - z", "params": {},
            "oracle": {"regular": True, "slopes": ["0"], "lengths": [1],
                       "coefficients": [{"solution": 0, "values": [[1, 0], [-1, 0], [1 / 3, 0]]}]}}
    path = tmp_path / "fx.json"
    path.write_text(json.dumps(good))
    code, out, _ = run(capsys, "examples", "run", "--file", str(path), "--q", "2", "--precision", "16")
    assert code == 0, out
    good["oracle"]["coefficients"][0]["values"][1] = [0.6, 0]
    path.write_text(json.dumps(good))
    code, out, _ = run(capsys, "examples", "run", "--file", str(path), "--q", "2", "--precision", "16")
    assert code == 1 and "FAIL" in out


def test_console_script_runs_all_examples():
    proc = subprocess.run([sys.executable, "-m", "qdiffeq.cli", "examples", "run", "--all", "--precision", "16"],
                          capture_output=True, text=True, timeout=300)
    assert proc.returncode == 0, proc.stdout + proc.stderr
