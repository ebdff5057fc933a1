import json
import os
import subprocess
import sys

import jsonschema
import pytest

from wittdegen.cli import build_parser, flatten, main, parse_text, render_text, sweep_specs
from wittdegen.report_schema import REPORT_SCHEMA, SWEEP_SCHEMA


def run(*args, env=None):
    return subprocess.run([sys.executable, "-m", "wittdegen", *args], capture_output=True,
                          text=True, env=env)


def test_parse_regime_b_command():
    args = build_parser().parse_args(["degenerate", "--p", "3", "--m1", "-9", "--m2", "0"])
    assert (args.command, args.p, args.m1, args.m2) == ("degenerate", 3, -9, 0)


def test_parse_witt_add():
    args = build_parser().parse_args(["witt", "add", "--p", "2", "--lambda", "1"])
    assert (args.op, args.p, args.lam) == ("add", 2, "1")


def test_non_prime_is_a_usage_error():
    res = run("degenerate", "--p", "4", "--m1", "0", "--m2", "-4")
    assert res.returncode == 64
    assert "p must be prime" in res.stderr


def test_unknown_flag_is_a_usage_error():
    res = run("hopf", "check", "--p", "3", "--bogus")
    assert res.returncode == 64


def test_malformed_expression_is_a_usage_error():
    res = run("witt", "add", "--p", "3", "--a", "u1^,u2")
    assert res.returncode == 64
    assert "malformed" in res.stderr


def test_unsupported_regime_exit_code():
    res = run("degenerate", "--p", "3", "--m1", "1", "--m2", "0")
    assert res.returncode == 2
    assert "supported regimes" in res.stderr


def test_witt_add_classical_p2():
    res = run("witt", "add", "--p", "2", "--lambda", "1")
    assert res.returncode == 0
    assert res.stdout.strip() == "(u1 + v1, u1*v1 + u2 + v2)"


def test_witt_neg_json():
    res = run("witt", "neg", "--p", "2", "--format", "json")
    assert json.loads(res.stdout) == {"first": "u1", "second": "u1^2 + u2"}


def test_witt_phi_text():
    assert main(["witt", "phi", "--p", "3", "--lambda", "pi", "--a", "x,y"]) == 0


def test_hopf_check_json():
    res = run("hopf", "check", "--p", "3", "--lambda", "pi^4", "--nu", "pi^2", "--format", "json")
    assert res.returncode == 0
    data = json.loads(res.stdout)
    assert data == {"rank": 9, "coassoc": True, "counit": True, "relations": True,
                    "antipode": True, "fiber_class": "Product(AlphaP, AlphaP) = (alpha_p)^2"}


def test_hopf_check_twisted_p2_is_unsupported():
    assert run("hopf", "check", "--p", "2", "--lambda", "pi").returncode == 2


def test_degenerate_json_matches_schema_and_is_byte_stable():
    a = run("degenerate", "--p", "3", "--m1", "-9", "--m2", "0", "--format", "json")
    b = run("degenerate", "--p", "3", "--m1", "-9", "--m2", "0", "--format", "json")
    assert a.returncode == 0 and a.stdout == b.stdout
    data = json.loads(a.stdout)
    jsonschema.validate(data, REPORT_SCHEMA)
    assert data["identified"] == {"lambda": "pi^4", "nu": "pi^2"}
    assert data["stabilizer"] == {"ideal": ["v1*z1^2 + v2"], "order": 3}


def test_text_and_json_carry_the_same_data():
    j = run("degenerate", "--p", "3", "--m1", "0", "--m2", "-3", "--format", "json")
    t = run("degenerate", "--p", "3", "--m1", "0", "--m2", "-3", "--format", "text")
    data = json.loads(j.stdout)
    assert parse_text(t.stdout) == data
    jsonschema.validate(parse_text(t.stdout), REPORT_SCHEMA)


def test_byte_stable_across_backends():
    env_py = dict(os.environ, WITTDEGEN_PURE_PYTHON="1")
    a = run("degenerate", "--p", "5", "--m1", "0", "--m2", "-5", "--format", "json", env=env_py)
    b = run("degenerate", "--p", "5", "--m1", "0", "--m2", "-5", "--format", "json")
    assert a.returncode == 0 and a.stdout == b.stdout


def test_flatten_round_trip_with_nesting():
    obj = {"a": [1, {"b": None, "c": [True, "x"]}], "d": {}, "e": [], "f": {"g": 2.5}}
    assert parse_text(render_text(obj)) == obj
    assert flatten({"x": [3]}) == [("x[0]", 3)]


def test_sweep_writes_ordered_reports(tmp_path):
    out = tmp_path / "report.json"
    res = run("sweep", "--p-list", "3,5", "--regimes", "A,B", "--n1-max", "1", "--out", str(out),
              "--jobs", "2")
    assert res.returncode == 0, res.stderr
    data = json.loads(out.read_text())
    jsonschema.validate(data, SWEEP_SCHEMA)
    assert [(r["spec"]["p"], r["spec"]["m1"]) for r in data] == [(3, 0), (3, -9), (5, 0), (5, -25)]
    serial = tmp_path / "serial.json"
    run("sweep", "--p-list", "3,5", "--regimes", "A,B", "--n1-max", "1", "--out", str(serial))
    assert serial.read_text() == out.read_text()


def test_sweep_specs_order():
    assert sweep_specs([3], ["B", "A"], 2) == [(3, -9, 0), (3, -18, 0), (3, 0, -3)]


def test_bad_regime_list_is_usage_error(tmp_path):
    assert run("sweep", "--regimes", "C", "--out", str(tmp_path / "x")).returncode == 64


def test_verify_p3_passes():
    res = run("verify", "--primes", "3")
    assert res.returncode == 0, res.stdout
    lines = res.stdout.splitlines()
    assert lines[0].split() == ["p", "witt_laws", "cocycle", "homomorphisms", "hopf_zp2",
                                "hopf_kernel", "examples"]
    assert lines[1].split() == ["3"] + ["pass"] * 6


def test_verify_p2_marks_kernel_rows_skipped():
    res = run("verify", "--primes", "2")
    assert res.returncode == 0
    row = res.stdout.splitlines()[1]
    assert row.startswith("2") and row.count("skipped (p=2)") == 2
    assert row.split()[1:5] == ["pass"] * 4


@pytest.mark.parametrize("primes", ["3,5", "5,3"])
def test_verify_row_order_follows_input(primes):
    res = run("verify", "--primes", primes)
    assert [line.split()[0] for line in res.stdout.splitlines()[1:]] == primes.split(",")
