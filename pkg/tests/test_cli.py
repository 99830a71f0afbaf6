import json
import subprocess
import sys

import pytest

from conic_fem import domains
from conic_fem.cli import main, parse_degrees


@pytest.fixture
def fan_file(tmp_path):
    path = tmp_path / "fan.json"
    path.write_text(domains.disk_fan().dumps())
    return path


def test_parse_degrees():
    assert parse_degrees("2..5") == (2, 3, 4, 5)
    assert parse_degrees("2-4") == (2, 3, 4)
    assert parse_degrees("2,4,6") == (2, 4, 6)


def test_validate_ok(fan_file, capsys):
    assert main(["validate", "--mesh", str(fan_file)]) == 0
    assert capsys.readouterr().out.strip().endswith("ok")


def test_validate_bad_mesh(tmp_path, capsys):
    doc = json.loads(domains.conic_mesh().dumps())
    doc["arcs"][0]["p0"][0] += 0.3
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    assert main(["validate", "--mesh", str(path)]) == 2
    assert "(a)" in capsys.readouterr().out


def test_dims(fan_file, capsys):
    assert main(["dims", "--mesh", str(fan_file), "--degree", "2"]) == 0
    assert capsys.readouterr().out.split() == ["N=5"]


def test_dims_classical(tmp_path, capsys):
    path = tmp_path / "sq.json"
    path.write_text(domains.square_mesh(2).dumps())
    assert main(["dims", "--mesh", str(path), "--degree", "3"]) == 0
    out = dict(s.split("=") for s in capsys.readouterr().out.split())
    assert out["N"] == out["classical"]


def test_run_writes_csv(tmp_path):
    out = tmp_path / "r.csv"
    assert main(["run", "--problem", "conic", "--degree", "2", "--levels", "1",
                 "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "level,degree,N,h,L2,H1" and len(lines) == 2


def test_run_stdout(capsys):
    assert main(["run", "--problem", "ellipse_poisson", "--degree", "2", "--levels", "1"]) == 0
    assert capsys.readouterr().out.startswith("level,degree")


@pytest.mark.parametrize("argv", [
    ["run", "--problem", "bogus"],
    ["run", "--problem", "conic", "--study", "p"],
    ["run", "--problem", "conic", "--degree", "1"],
    ["dims", "--mesh", "/nonexistent.json", "--degree", "2"],
    [],
])
def test_invalid_input_exit_code(argv):
    assert main(argv) == 2


def test_inadmissible_mesh_in_run(tmp_path, capsys):
    doc = json.loads(domains.disk_fan().dumps())
    doc["vertices"][0] = [0.55, 0.55]
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    assert main(["run", "--problem", "disk-eigen", "--mesh", str(path), "--levels", "1"]) == 2
    assert "validation" in capsys.readouterr().err


def test_solver_failure_exit_code(monkeypatch):
    from conic_fem import cli
    from conic_fem.errors import SolverError

    def boom(spec):
        raise SolverError("factorization failed")

    monkeypatch.setattr(cli, "run", boom)
    assert main(["run", "--problem", "conic", "--levels", "1"]) == 3


def test_console_script(fan_file):
    proc = subprocess.run([sys.executable, "-m", "conic_fem.cli", "dims", "--mesh", str(fan_file),
                           "--degree", "3"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("N=")
