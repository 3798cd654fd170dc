import csv
import io
import json
import subprocess
import sys

import pytest

from qes_susy.cli import main

FAST = [
    ["algebraic", "--N", "3"],
    ["er", "--N", "2", "--kappa", "1"],
    ["susy1", "--N", "1", "--emit", "zero-modes"],
    ["susy1", "--N", "2", "--emit", "decomposition"],
    ["susy1", "--N", "0", "--points", "5"],
    ["susy2", "--emit", "omega", "--points", "7"],
    ["susy2", "--emit", "missing-state", "--points", "7"],
    ["susy2", "--emit", "spectrum", "--M", "120", "--states", "3"],
    ["mesh", "--N", "1/2", "--states", "3"],
    ["wkb", "--nmax", "3"],
    ["variational", "--k", "1", "2", "--susy"],
    ["tables", "--which", "3"],
    ["scan", "--Ngrid", "0", "1/2", "1"],
    ["scan", "--Ngrid=-1,-1/2,0"],
    ["nc"],
]


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def parse_csv(text):
    body = [line for line in text.splitlines() if not line.startswith("#")]
    return list(csv.reader(io.StringIO("\n".join(body))))


@pytest.mark.parametrize("argv", FAST, ids=lambda a: " ".join(a))
def test_subcommands_succeed(argv, capsys):
    code, out, _ = run(argv, capsys)
    assert code == 0
    rows = parse_csv(out)
    assert len(rows) >= 2 and all(len(r) == len(rows[0]) for r in rows)
    assert f"# command: {argv[0]}" in out


@pytest.mark.parametrize("argv", [FAST[0], FAST[8], FAST[10]], ids=lambda a: a[0])
def test_output_is_deterministic(argv, capsys):
    first = run(argv, capsys)[1]
    assert run(argv, capsys)[1] == first


def test_json_matches_csv(capsys):
    _, text, _ = run(["algebraic", "--N", "2", "--format", "json"], capsys)
    doc = json.loads(text)
    _, text, _ = run(["algebraic", "--N", "2"], capsys)
    rows = parse_csv(text)
    assert doc["columns"] == rows[0]
    assert doc["rows"] == rows[1:]
    assert doc["meta"]["N"] == 2


def test_algebraic_values(capsys):
    _, text, _ = run(["algebraic", "--N", "1", "--format", "json"], capsys)
    doc = json.loads(text)
    col = doc["columns"].index("E")
    energies = sorted(float(r[col]) for r in doc["rows"])
    assert energies == pytest.approx([1.5 - 3**0.5, 1.5 + 3**0.5], abs=1e-14)


def test_output_file(tmp_path, capsys):
    target = tmp_path / "levels.csv"
    code, out, _ = run(["mesh", "--states", "2", "--output", str(target)], capsys)
    assert code == 0 and out == ""
    rows = parse_csv(target.read_text(encoding="utf-8"))
    assert float(rows[1][1]) == pytest.approx(0.5, abs=1e-12)


@pytest.mark.parametrize("argv", [["mesh", "--bogus"], ["tables", "--which", "9"], ["mesh", "--format", "xml"]])
def test_bad_flags_exit_2(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 2


@pytest.mark.parametrize("argv", [["mesh", "--M", "2"], ["mesh", "--nu", "-1"], ["susy1", "--N", "1/2"],
                                  ["variational", "--k", "-1"], ["susy2", "--N", "0", "--omega0", "0.1"],
                                  ["susy1", "--points", "1"]])
def test_domain_errors_exit_2(argv, capsys):
    code, out, err = run(argv, capsys)
    assert code == 2 and out == "" and err.startswith("error:")


def test_unsupported_request_exits_1(capsys):
    code, out, err = run(["wkb", "--N", "3"], capsys)
    assert code == 1 and out == "" and "numerical failure" in err


def test_nc_bracket_without_sign_change_exits_1(capsys):
    code, _, err = run(["nc", "--bracket", "0", "0.5"], capsys)
    assert code == 1 and "Bracket" in err


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "qes_susy.cli", "algebraic", "--N", "0"],
                          capture_output=True, text=True, timeout=60)
    assert proc.returncode == 0
    assert parse_csv(proc.stdout)[1][:3] == ["0", "1/2", "0.5"]
