import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from lipbounds.cli import HEADERS, main, read_constants
from lipbounds.corpus import get_entry


def run_cli(tmp_path, *args, name="out.txt"):
    out = tmp_path / name
    code = main([*args, "--out", str(out)])
    text = out.read_text() if out.exists() else ""
    return code, text


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_bound_with_equal_endpoints_is_all_zero(tmp_path):
    code, text = run_cli(tmp_path, "--cmd", "bound", "--fn", "sincos", "--xa", "1,2", "--xb", "1,2")
    assert code == 0
    rs = rows(text)
    assert len(rs) == 12
    assert list(rs[0]) == HEADERS["bound"]
    for r in rs:
        assert float(r["bound_value"]) == 0.0 and r["valid"] == "true"


def test_bound_rows_with_local_constants(tmp_path):
    code, text = run_cli(tmp_path, "--cmd", "bound", "--fn", "cubic", "--xa", "0", "--xb", "0.5", "--local")
    assert code == 0
    rs = rows(text)
    assert len(rs) == 24 and {r["locality"] for r in rs} == {"global", "segment_local"}
    up = {r["locality"]: float(r["bound_value"]) for r in rs if r["variant"] == "linear_general_upper"}
    assert up["global"] == pytest.approx(1.5)
    assert up["segment_local"] <= 0.375 + 1e-3


def test_verify_quadratic_coupled(tmp_path):
    code, text = run_cli(tmp_path, "--cmd", "verify", "--fn", "quadratic_coupled", "--pairs", "10000",
                         "--seed", "42")
    assert code == 0
    lines = text.splitlines()
    assert lines[0] == ",".join(HEADERS["verify"])
    assert len(lines) == 1 + 10000 * 12
    assert ",false," not in text.split("\n", 1)[1].replace(",true,", ",")


def test_verify_failure_exit_code(tmp_path):
    consts = tmp_path / "c.csv"
    consts.write_text("kappa,1,0,0\nM,1,1,0,0\n")
    code, _ = run_cli(tmp_path, "--cmd", "verify", "--fn", "cubic", "--pairs", "50", "--constants", str(consts))
    assert code == 2


def test_strict_verify(tmp_path):
    code, text = run_cli(tmp_path, "--cmd", "verify", "--fn", "rosenbrock", "--pairs", "500", "--strict")
    assert code == 0
    assert all(r["strict_ok"] == "true" for r in rows(text))


def test_minimize_quad_shifted(tmp_path):
    code, text = run_cli(tmp_path, "--cmd", "minimize", "--fn", "quad_shifted", "--tol", "1e-6")
    assert code == 0
    rs = rows(text)
    assert list(rs[0]) == HEADERS["minimize"]
    result = rs[-1]
    assert result["kind"] == "result" and result["converged"] == "true"
    assert float(result["gap"]) <= 1e-6
    assert float(rs[-2]["gap"]) <= 1e-6 or rs[-2]["kind"] == "trace"
    assert all(r["kind"] == "trace" for r in rs[:-1])
    np.testing.assert_allclose([float(v) for v in result["best_point"].split(";")], [0.3, -0.2], atol=1e-3)


def test_minimize_budget_exhaustion_still_succeeds(tmp_path):
    code, text = run_cli(tmp_path, "--cmd", "minimize", "--fn", "rosenbrock", "--tol", "1e-9", "--budget", "5")
    assert code == 0
    assert rows(text)[-1]["converged"] == "false"


def test_enclose(tmp_path):
    code, text = run_cli(tmp_path, "--cmd", "enclose", "--fn", "quartic")
    assert code == 0
    rs = rows(text)
    assert [r["flavor"] for r in rs] == ["linear", "quadratic"]
    for r in rs:
        assert float(r["lo"]) <= 0.0 and float(r["hi"]) >= 1.0


def test_estimate_round_trips_through_constants_file(tmp_path):
    code, text = run_cli(tmp_path, "--cmd", "estimate", "--fn", "six_hump_camel", name="c.csv")
    assert code == 0
    k, m = read_constants(str(tmp_path / "c.csv"), 2)
    e = get_entry("six_hump_camel")
    assert k.contains(e.kappa_oracle) and m.contains(e.m_oracle)
    # the file feeds straight back into verify
    code, _ = run_cli(tmp_path, "--cmd", "verify", "--fn", "six_hump_camel", "--pairs", "200",
                      "--constants", str(tmp_path / "c.csv"), name="v.csv")
    assert code == 0


def test_estimate_on_segment(tmp_path):
    code, text = run_cli(tmp_path, "--cmd", "estimate", "--fn", "cubic", "--xa", "0", "--xb", "0.5")
    assert code == 0
    first = text.splitlines()[0].split(",")
    assert first[:2] == ["kappa", "1"] and float(first[3]) == pytest.approx(0.75 + 1e-3, abs=1e-9)


def test_expression_function(tmp_path):
    code, text = run_cli(tmp_path, "--cmd", "verify", "--fn", "expr:x1^2 + sin(x2)", "--box", "-1:1,0:3",
                         "--pairs", "300")
    assert code == 0
    assert len(rows(text)) == 300 * 12


def test_expression_minimize(tmp_path):
    code, text = run_cli(tmp_path, "--cmd", "minimize", "--fn", "expr:(x1-0.5)^2", "--box", "-1:1",
                         "--tol", "1e-4")
    assert code == 0
    assert float(rows(text)[-1]["incumbent"]) == pytest.approx(0.0, abs=1e-4)


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\ncmd = verify\nfn = cubic\npairs = 7\nseed = 3\nformat = jsonl\n")
    code, text = run_cli(tmp_path, "--config", str(cfg), "--pairs", "5")
    assert code == 0
    recs = [json.loads(line) for line in text.splitlines()]
    assert len(recs) == 5 * 12
    assert recs[0]["seed"] == 3 and recs[0]["function"] == "cubic"
    assert isinstance(recs[0]["valid"], bool)


def test_constants_file_single_off_diagonal_row(tmp_path):
    p = tmp_path / "c.csv"
    p.write_text("kappa,1,-1,1\nkappa,2,-2,2\nM,1,1,0,1\nM,1,2,-0.5,0.5\nM,2,2,0,2\n")
    k, m = read_constants(str(p), 2)
    assert k.hi.tolist() == [1.0, 2.0]
    assert m.lo[1, 0] == -0.5 and m.hi[0, 1] == 0.5


@pytest.mark.parametrize("args", [
    ["--cmd", "verify", "--fn", "nope"],
    ["--cmd", "verify"],
    ["--fn", "cubic"],
    ["--cmd", "frobnicate", "--fn", "cubic"],
    ["--cmd", "verify", "--fn", "cubic", "--box", "1:0"],
    ["--cmd", "verify", "--fn", "cubic", "--box", "abc"],
    ["--cmd", "verify", "--fn", "expr:x1 +", "--box", "0:1"],
    ["--cmd", "verify", "--fn", "expr:x2", "--box", "0:1"],
    ["--cmd", "bound", "--fn", "cubic", "--xa", "0"],
    ["--cmd", "bound", "--fn", "cubic", "--xa", "0", "--xb", "5"],
    ["--cmd", "verify", "--fn", "cubic", "--pairs", "0"],
    ["--cmd", "verify", "--fn", "cubic", "--format", "xml"],
    ["--cmd", "verify", "--fn", "cubic", "--seed", "-1"],
    ["--cmd", "verify", "--fn", "cubic", "--bogus"],
])
def test_usage_errors(tmp_path, args, capsys):
    code, _ = run_cli(tmp_path, *args)
    assert code == 1
    assert "lipbounds: error:" in capsys.readouterr().err


def test_malformed_constants_file(tmp_path):
    p = tmp_path / "c.csv"
    p.write_text("kappa,1,2\n")
    code, _ = run_cli(tmp_path, "--cmd", "verify", "--fn", "cubic", "--constants", str(p))
    assert code == 1


def test_numeric_failure_exit_code(tmp_path, capsys):
    code, _ = run_cli(tmp_path, "--cmd", "verify", "--fn", "expr:log(x1)", "--box", "-1:1", "--pairs", "10")
    assert code == 3
    assert "numeric failure" in capsys.readouterr().err


@pytest.mark.parametrize("args", [
    ["--cmd", "verify", "--fn", "logsumexp", "--pairs", "300", "--seed", "9", "--local"],
    ["--cmd", "minimize", "--fn", "six_hump_camel", "--tol", "1e-3"],
    ["--cmd", "estimate", "--fn", "expr:x1*x2", "--box", "-1:1,-1:1"],
    ["--cmd", "enclose", "--fn", "sin_sum", "--format", "jsonl"],
    ["--cmd", "bound", "--fn", "rosenbrock", "--xa", "-1,0", "--xb", "1.5,2.5", "--strict"],
])
def test_reports_are_byte_identical(tmp_path, args):
    _, first = run_cli(tmp_path, *args, name="a")
    _, second = run_cli(tmp_path, *args, name="b")
    assert (tmp_path / "a").read_bytes() == (tmp_path / "b").read_bytes()
    assert first


def test_numbers_round_trip_at_full_precision(tmp_path):
    _, text = run_cli(tmp_path, "--cmd", "bound", "--fn", "sincos", "--xa", "0.1,0.2", "--xb", "2.9,1.7")
    for r in rows(text):
        v = float(r["bound_value"])
        assert format(v, ".17g") == r["bound_value"]


def test_console_entry_point_writes_stdout():
    out = subprocess.run([sys.executable, "-m", "lipbounds.cli", "--cmd", "enclose", "--fn", "cubic"],
                         capture_output=True, text=True)
    assert out.returncode == 0
    assert out.stdout.startswith("flavor,lo,hi")
