import json

import pytest

from ldcforge import cli
from ldcforge.cli import main, parse_duration


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None), out


def test_parse_duration():
    assert parse_duration("30s") == 30
    assert parse_duration("2m") == 120
    assert parse_duration("1.5") == 1.5
    assert parse_duration("250ms") == pytest.approx(0.25)
    for bad in ("", "-3s", "0", "soon"):
        with pytest.raises(Exception):
            parse_duration(bad)


def test_m2_check_exit_codes(capsys):
    code, d, _ = run(capsys, "m2", "check", 15)
    assert code == 1 and d["verdict"] == "nonmember"
    code, d, _ = run(capsys, "m2", "check", 511)
    assert code == 0 and d["verdict"] == "member"
    code, d, _ = run(capsys, "m2", "check", 511, "--method", "brute")
    assert code == 0 and d["verdict"] == "member"


def test_m2_check_errors(capsys):
    assert main(["m2", "check", "105"]) == 2  # three primes
    assert main(["m2", "check", "17"]) == 2


def test_output_is_deterministic(capsys):
    outs = [run(capsys, "m2", "check", 2047)[2] for _ in range(2)]
    assert outs[0] == outs[1]
    outs = [run(capsys, "family", "greedy", "--m", 511, "--n", 2, "--seed", 3)[2] for _ in range(2)]
    assert outs[0] == outs[1]


def test_poly_find_and_verify(capsys, tmp_path):
    f = tmp_path / "cert.json"
    code, d, _ = run(capsys, "poly", "find", 2047, "--out", f)
    assert code == 0 and json.loads(f.read_text()) == d
    code, rep, _ = run(capsys, "poly", "verify", f)
    assert code == 0 and rep["valid"] and rep["certificate_consistent"]
    # tamper with the constant term
    d["poly"]["terms"][-1]["coef_hex"] = "001"
    f.write_text(json.dumps(d))
    code, rep, _ = run(capsys, "poly", "verify", f)
    assert code == 1 and not rep["valid"]


def test_poly_lagrange(capsys, tmp_path):
    f = tmp_path / "lag.json"
    code, d, _ = run(capsys, "poly", "find", 15, "--method", "lagrange", "--out", f)
    assert code == 0 and d["poly"]["k"] == 4
    assert run(capsys, "poly", "verify", f)[0] == 0


def test_family_commands(capsys):
    code, d, _ = run(capsys, "family", "gram", "--m", 35, "--n", 4)
    assert code == 0 and d["n"] == 4
    code, d, _ = run(capsys, "family", "greedy", "--m", 15, "--n", 2)
    assert code == 0 and d["n"] == 2


def test_ldc_round_trip(capsys, tmp_path):
    spec = tmp_path / "spec.json"
    cw = tmp_path / "cw.bin"
    assert run(capsys, "ldc", "spec", "--m", 511, "--out", spec)[0] == 0
    code, d, _ = run(capsys, "ldc", "encode", "--spec", spec, "--message", "1ab,07", "--out", cw)
    assert code == 0 and d["message"] == ["1ab", "007"]
    assert cw.read_bytes()[:4] == b"LDC1"
    for i, want in ((1, 0x1AB), (2, 7)):
        code, d, _ = run(capsys, "ldc", "decode", "--spec", spec, "--codeword", cw, "--i", i, "--seed", 9)
        assert code == 0 and int(d["value"], 16) == want and d["queries"] == 3
    code, d, _ = run(capsys, "ldc", "corrupt-test", "--spec", spec, "--trials", 2000)
    assert code == 0 and d["passed"]


def test_compose_command(capsys, tmp_path):
    left, right = tmp_path / "l.json", tmp_path / "r.json"
    run(capsys, "poly", "find", 15, "--method", "lagrange", "--out", left)
    run(capsys, "poly", "find", 511, "--out", right)
    code, d, _ = run(capsys, "compose", "--left", left, "--right", right)
    assert code == 0 and d["t"] == 36 and d["k"] <= 12
    assert run(capsys, "compose", "--left", right, "--right", right)[0] == 2


def test_plan_command(capsys, tmp_path):
    assert run(capsys, "plan", "--r", 6)[1]["k_bound"] == "27"
    assert run(capsys, "plan", "--r", 5, "--inventory", "511")[1]["k_bound"] == "24"
    run(capsys, "m2", "check", 511, "--out", tmp_path / "a.json")
    run(capsys, "m2", "check", 15, "--out", tmp_path / "b.json")
    assert run(capsys, "plan", "--r", 4, "--inventory", tmp_path)[1]["k_bound"] == "12"
    d = run(capsys, "plan", "--r", 110, "--symbolic")[1]
    assert int(d["k_bound"]) == 3**51 * 2**8


def test_pir_command(capsys, tmp_path):
    spec = tmp_path / "spec.json"
    run(capsys, "ldc", "spec", "--m", 15, "--poly", "lagrange", "--out", spec)
    code, d, _ = run(capsys, "pir", "simulate", "--spec", spec, "--bits", "01", "--i", 2)
    assert code == 0 and d["output"] == 1 and d["comm_bits"] == 48
    db = tmp_path / "db.bin"
    db.write_bytes(bytes([0b01]))
    code, d, _ = run(capsys, "pir", "simulate", "--spec", spec, "--db", db, "--i", 1)
    assert code == 0 and d["output"] == 1


def test_scan_and_table_verify(capsys):
    code, d, _ = run(capsys, "scan-mersenne", "--t-max", 40)
    assert code == 0 and [r["t"] for r in d["rows"]] == [11, 23, 37]
    code, d, _ = run(capsys, "table-verify", "--t-max", 61)
    assert code == 0 and d["valid"] and len(d["polynomials"]) == 2


def test_missing_file_is_an_error(capsys, tmp_path):
    assert main(["poly", "verify", str(tmp_path / "nope.json")]) == 2
