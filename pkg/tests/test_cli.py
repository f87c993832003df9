import json
import math
import subprocess
import sys

import pytest

from qes2d.cli import COMMANDS, HANDLERS, EXIT_IO, EXIT_NUMERIC, EXIT_OK, EXIT_USAGE, UsageError, dumps, main, parse, read_config
from qes2d.errors import ConvergenceError


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_sepconst_n1(capsys):
    code, out, _ = run(capsys, "sepconst", "--n", "1", "--k1", "0")
    assert code == EXIT_OK
    lam = json.loads(out)["lambdas"]
    assert lam == pytest.approx([-math.sqrt(40), math.sqrt(40)], rel=1e-14)


def test_elliptic_sepconst_at_zero_distance(capsys):
    code, out, _ = run(capsys, "sepconst", "--model", "v2", "--k1", "1.5", "--k2", "2.5", "--n", "1", "--d2", "0")
    assert code == EXIT_OK
    assert json.loads(out)["lambdas"] == pytest.approx([-49.0, -25.0])


def test_output_is_byte_identical(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        code, out, _ = run(capsys, "spectrum", "--n", "3", "--k1", "1", "--output", str(path))
        assert code == EXIT_OK and "lambdas" in out
    assert a.read_bytes() == b.read_bytes()
    assert json.loads(a.read_text())["degeneracy"] == 4


def test_config_file_precedence(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# level and coupling\ncommand = sepconst\nn = 2\nk1 = 0   # inline comment\n")
    parsed = parse(["--config", str(cfg)])
    assert parsed["command"] == "sepconst" and parsed["n"] == 2 and parsed["omega"] == 1.0
    assert parse(["--config", str(cfg), "--n", "3"])["n"] == 3
    code, out, _ = run(capsys, "--config", str(cfg))
    assert code == EXIT_OK and len(json.loads(out)["lambdas"]) == 3


def test_config_errors(capsys, tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("omgea = 2\n")
    with pytest.raises(UsageError, match="valid keys"):
        read_config(bad)
    bad.write_text("n = two\n")
    code, _, err = run(capsys, "sepconst", "--config", str(bad))
    assert code == EXIT_USAGE and "malformed" in err
    code, _, err = run(capsys, "sepconst", "--config", str(tmp_path / "missing.cfg"))
    assert code == EXIT_IO


def test_exit_codes(capsys):
    assert run(capsys, "sepconst", "--k2", "1.5", "--sign2", "-")[0] == EXIT_USAGE
    assert run(capsys, "sepconst", "--omega", "abc")[0] == EXIT_USAGE
    assert run(capsys)[0] == EXIT_USAGE
    assert run(capsys, "asymptotics", "--energy", "3.5", "--smax", "100")[0] == EXIT_USAGE
    assert run(capsys, "sepconst", "--model", "v2", "--n", "2")[0] == EXIT_USAGE


def test_numerical_failure_exit_code(capsys, monkeypatch):
    def fail(cfg, model):
        raise ConvergenceError("no convergence")
    monkeypatch.setitem(HANDLERS, "sepconst", fail)
    code, _, err = run(capsys, "sepconst")
    assert code == EXIT_NUMERIC and "numerical failure" in err


def test_wavefn_csv(capsys):
    code, out, _ = run(capsys, "wavefn", "--n", "2", "--q1", "1", "--grid", "5", "--format", "csv")
    assert code == EXIT_OK
    lines = out.strip().splitlines()
    assert lines[0] == "u1,u2,x,y,value" and len(lines) == 26
    u1, u2, x, y, _ = map(float, lines[1].split(","))
    assert x == pytest.approx(0.5 * (u1 * u1 - u2 * u2)) and y == pytest.approx(u1 * u2)


def test_csv_only_for_wavefn(capsys):
    assert run(capsys, "sepconst", "--format", "csv")[0] == EXIT_USAGE


@pytest.mark.parametrize("argv", [
    ["eigvec", "--n", "2", "--q", "1"],
    ["gram", "--n", "1"],
    ["interbasis", "--n", "2"],
    ["niven", "--n", "3", "--k1", "1"],
    ["limits", "--model", "v2", "--k1", "1.5", "--k2", "2.5", "--n", "2", "--q", "1"],
    ["limits", "--model", "v2", "--k1", "1.5", "--k2", "2.5", "--n", "2", "--kind", "cartesian-dinf"],
    ["oracle", "--kind", "lambda1d", "--n", "1", "--count", "2"],
    ["oracle", "--kind", "sextic", "--n", "1", "--count", "2"],
    ["asymptotics", "--energy", "3.3"],
    ["asymptotics", "--model", "v2", "--k1", "1.5", "--k2", "2.5", "--energy", "4.3", "--d2", "2"],
])
def test_commands_run(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == EXIT_OK, err
    assert isinstance(json.loads(out), dict)


def test_eigvec_values(capsys):
    code, out, _ = run(capsys, "eigvec", "--n", "2", "--q", "1")
    data = json.loads(out)
    assert data["lambda"] == 0.0
    assert data["coefficients"] == pytest.approx([1.0, 0.0, -2 / 7], abs=1e-14)


def test_dumps_deterministic():
    assert dumps({"b": -0.0, "a": [1, 0.1, float("nan")], "c": True}) == '{"a": [1, 0.10000000000000001, null], "b": 0, "c": true}'


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "qes2d", "sepconst", "--n", "0"], capture_output=True, text=True)
    assert res.returncode == 0 and json.loads(res.stdout)["lambdas"] == [0.0]
    assert len(COMMANDS) == 10
