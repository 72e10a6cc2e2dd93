import csv
import io
import json
import math
import os
import subprocess
import sys

import pytest

from oscpoly.cli import (
    EXIT_DOMAIN,
    EXIT_OK,
    EXIT_USAGE,
    FIELDS,
    RunConfig,
    emit,
    main,
    parse_args,
    render,
)


def run_cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_parse_defaults():
    cfg = parse_args(["approx", "-k", "2", "-a", "0", "-x", "0.3"])
    assert cfg == RunConfig("approx", 2, 0.0, 0.3, 256, 1e-12, cfg.digits, "json", None)
    assert cfg.digits >= 30
    cfg = parse_args(["scan", "-k", "40", "-a", "1.5", "--grid", "512", "--format", "csv"])
    assert (cfg.command, cfg.grid, cfg.format) == ("scan", 512, "csv")


@pytest.mark.parametrize("argv", [
    [],
    ["nope"],
    ["scan", "-k", "4", "-a", "0", "--grid", "4"],
    ["approx", "-k", "4", "-a", "0"],
    ["params", "-k", "4"],
    ["params", "-k", "4", "-a", "0", "--digits", "20"],
    ["params", "-k", "4", "-a", "0", "--tol", "0"],
    ["params", "-k", "4", "-a", "0", "--format", "xml"],
])
def test_usage_errors_exit_2(argv):
    with pytest.raises(SystemExit) as exc:
        parse_args(argv)
    assert exc.value.code == EXIT_USAGE


def test_params_json(capsys):
    code, out, _ = run_cli(capsys, "params", "-k", "2", "-a", "-1.25")
    assert code == EXIT_OK
    rec = json.loads(out)[0]
    assert list(rec) == FIELDS["params"]
    assert rec["u"] == 1.3125 and rec["q"] == 0.42857142857142855
    assert rec["case"] == "II" and rec["q_branch"] == "QSmall"


def test_eval(capsys):
    code, out, _ = run_cli(capsys, "eval", "-k", "2", "-a", "0", "-x", "0")
    assert code == EXIT_OK
    rec = json.loads(out)[0]
    assert rec["P"] == -0.5 and rec["P_prime"] == 0.0
    assert rec["P_decimal"].startswith("-0.5")
    code, _, err = run_cli(capsys, "eval", "-k", "2", "-a", "0", "-x", "1.5")
    assert code == EXIT_DOMAIN and "error" in err


def test_approx_certified(capsys):
    code, out, _ = run_cli(capsys, "approx", "-k", "2", "-a", "0", "-x", "0.3")
    assert code == EXIT_OK
    rec = json.loads(out)[0]
    assert rec["certified"] is True and rec["violation"] <= 0


def test_approx_odd_k(capsys):
    code, out, err = run_cli(capsys, "approx", "-k", "3", "-a", "0", "-x", "0.1")
    assert code == EXIT_DOMAIN
    assert "odd k: approximation not defined by Theorem 1" in err
    assert out == ""


def test_approx_turning_point_json_inf(capsys):
    from oscpoly.params import derive_params

    x = derive_params(10, 3.0).turning_point
    code, out, _ = run_cli(capsys, "approx", "-k", "10", "-a", "3", "-x", repr(x))
    assert code == EXIT_OK
    rec = json.loads(out)[0]
    assert rec["r_bound"] == "inf" and rec["certified"] is False and rec["g_exact"] == "nan"


def test_scan_csv(capsys):
    code, out, err = run_cli(capsys, "scan", "-k", "2", "-a", "0", "--grid", "16", "--format", "csv")
    assert code == EXIT_OK
    assert "passed=True" in err
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 16 and list(rows[0]) == FIELDS["scan"]
    assert all(float(r["violation"]) <= 0 for r in rows)
    assert "\r" not in out


def test_zeros(capsys):
    code, out, _ = run_cli(capsys, "zeros", "-k", "10", "-a", "2")
    assert code == EXIT_OK
    recs = json.loads(out)
    assert len(recs) == 5
    assert [r["index"] for r in recs] == list(range(5))
    assert all(r["bracket_verified"] for r in recs)


def test_mass(capsys):
    code, out, _ = run_cli(capsys, "mass", "-k", "10", "-a", "1")
    assert code == EXIT_OK
    rec = json.loads(out)[0]
    assert rec["pass"] is True and rec["integral"] > rec["bound1"] > rec["bound2"]
    code, _, _ = run_cli(capsys, "mass", "-k", "10", "-a", "0.5")
    assert code == EXIT_DOMAIN


def test_binom(capsys):
    code, out, _ = run_cli(capsys, "binom")
    assert code == EXIT_OK
    assert len(json.loads(out)) == 12
    code, out, _ = run_cli(capsys, "binom", "-x", "1")
    assert json.loads(out)[0]["binom"] == pytest.approx(2.0)


def test_bench(capsys):
    code, out, _ = run_cli(capsys, "bench", "-k", "10", "-a", "1", "--grid", "500")
    assert code == EXIT_OK
    rec = json.loads(out)[0]
    assert rec["n_points"] == 500 and rec["ratio"] > 0


def test_domain_error_exit_3(capsys):
    code, _, err = run_cli(capsys, "params", "-k", "2", "-a", "-5")
    assert code == EXIT_DOMAIN and err.startswith("error:")


def test_output_file_and_unwritable(tmp_path, capsys):
    target = tmp_path / "p.json"
    code, out, _ = run_cli(capsys, "params", "-k", "4", "-a", "1", "-o", str(target))
    assert code == EXIT_OK and out == ""
    assert json.loads(target.read_text())[0]["k"] == 4
    code, _, err = run_cli(capsys, "params", "-k", "4", "-a", "1", "-o", str(tmp_path / "missing" / "p.json"))
    assert code == EXIT_USAGE and "cannot write" in err


def test_render_empty():
    assert render([], "json", ["a", "b"]) == "[]\n"
    assert render([], "csv", ["a", "b"]) == "a,b\n"


def test_render_round_trip():
    recs = [{"x": 0.1, "n": 3, "ok": True, "s": "II", "big": 1e300, "bad": math.nan, "neg": -math.inf}]
    js = json.loads(render(recs, "json"))[0]
    assert js == {"x": 0.1, "n": 3, "ok": True, "s": "II", "big": 1e300, "bad": "nan", "neg": "-inf"}
    row = next(csv.DictReader(io.StringIO(render(recs, "csv"))))
    assert row == {"x": "0.10000000000000001", "n": "3", "ok": "true", "s": "II", "big": "1.0000000000000001e+300",
                   "bad": "nan", "neg": "-inf"}
    assert float(row["x"]) == 0.1


def test_emit_stdout(capsys):
    emit([{"a": 1}], "json")
    assert capsys.readouterr().out == '[\n  {"a": 1}\n]\n'


def test_deterministic_output():
    argv = [sys.executable, "-m", "oscpoly", "scan", "-k", "8", "-a", "2", "--grid", "32"]
    outs = {subprocess.run(argv, capture_output=True, text=True, check=True).stdout for _ in range(2)}
    assert len(outs) == 1


def test_console_entry_and_version():
    out = subprocess.run([sys.executable, "-m", "oscpoly", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.strip().startswith("oscpoly")


def test_env_digits_override():
    env = dict(os.environ, OSCPOLY_DIGITS="60")
    code = "from oscpoly.cli import parse_args; print(parse_args(['params', '-k', '2', '-a', '0']).digits)"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "60"
