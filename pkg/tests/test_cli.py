import io
import json
import subprocess
import sys
from fractions import Fraction

import pytest

from lcrenyi.cli import run


def _call(*argv):
    buf = io.StringIO()
    code = run(list(argv), stdout=buf)
    return code, buf.getvalue()


def _json(*argv):
    code, text = _call(*argv)
    return code, json.loads(text)


def test_alpha_star_report():
    code, rep = _json("alpha-star", "--width", "1e-12")
    assert code == 0 and rep["pass"]
    lo, hi = Fraction(rep["lo"]), Fraction(rep["hi"])
    assert hi - lo <= Fraction(1, 10**12)
    assert rep["mid_decimal"].startswith("1.24111640784")


def test_bound_branches():
    _, rep = _json("bound", "--alpha", "1.0")
    assert rep["branch"] == "uniform"
    _, rep = _json("bound", "--alpha", "3", "--regime", "general", "--variance", "4")
    assert rep["branch"] == "one_sided_exponential"
    assert rep["bound"] == pytest.approx(0.5 * __import__("math").log(4) + rep["constant"])


def test_constants_and_csv_sweep():
    _, rep = _json("constants", "--alpha", "2")
    row = rep["cases"][0]
    assert row["c_minus"] == pytest.approx(8.0) and row["c_plus"] == pytest.approx(125 / 9)
    code, text = _call("sweep", "--alphas", "1.5:3:4", "--format", "csv")
    lines = text.strip().splitlines()
    assert code == 0
    assert lines[0] == "alpha,c_minus,c_plus,c_alpha"
    assert len(lines) == 5


def test_entropy_command_closed_form():
    code, rep = _json("entropy", "--density", '{"type": "uniform", "halfwidth": 1}', "--alphas", "0.5,2")
    assert code == 0
    for row in rep["cases"]:
        assert row["renyi_entropy"] == pytest.approx(row["closed_form"])


def test_certify_parts():
    assert _call("certify", "--part", "a")[0] == 0
    assert _call("certify", "--part", "b", "--alpha", "1.5")[0] == 1
    code, rep = _json("certify", "--part", "e", "--nmax", "40", "--brief")
    assert code == 0
    assert rep["certificate"]["pattern"]["certified"]


def test_usage_and_budget_exit_codes(tmp_path):
    assert _call("no-such-command")[0] == 2
    assert _call("constants", "--alpha", "0.5")[0] == 2
    assert _call("verify-theorem", "--regime", "general", "--alphas", "1.5")[0] == 2
    assert _call("entropy")[0] == 2
    assert _call("alpha-star", "--width", "1e-400000")[0] == 3
    assert _call("verify-theorem", "--samples", "4", "--jobs", "0")[0] == 2


def test_out_file(tmp_path):
    out = tmp_path / "r.json"
    code, text = _call("alpha-star", "--out", str(out))
    assert code == 0 and text == ""
    assert json.loads(out.read_text())["command"] == "alpha-star"


def test_replay_is_byte_identical():
    a = _call("verify-theorem", "--samples", "30", "--seed", "5", "--no-timing")[1]
    b = _call("verify-theorem", "--samples", "30", "--seed", "5", "--no-timing")[1]
    assert a == b


def test_jobs_do_not_change_results():
    a = _call("verify-theorem", "--samples", "40", "--seed", "3", "--no-timing")[1]
    b = _call("verify-theorem", "--samples", "40", "--seed", "3", "--jobs", "3", "--no-timing")[1]
    strip = lambda t: {k: v for k, v in json.loads(t).items() if k != "config"}
    assert strip(a) == strip(b)


def test_epi_check_on_explicit_pair():
    u = '{"type": "uniform", "halfwidth": 1}'
    code, rep = _json("epi-check", "--density", u, "--alphas", "2", "--min-cells", "1024")
    assert code == 0
    assert rep["checks"][0]["value"] > 0


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "lcrenyi.cli", "alpha-star", "--width", "1e-6"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["pass"]
