import json
import math
import subprocess
import sys

import numpy as np
import pytest

from concop import cli
from concop.errors import SpecParseError
from concop.expression import parse_text


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_grid_parsing():
    assert np.allclose(cli.parse_grid("0:1:0.25"), [0, 0.25, 0.5, 0.75, 1.0])
    assert np.allclose(cli.parse_grid("0:10:0.1")[-1], 10.0)
    assert np.allclose(cli.parse_grid("log:1:100:3"), [1, 10, 100])
    for bad in ("1:0:0.1", "0:1", "0:1:-1", "log:0:1:5", "a:b:c"):
        with pytest.raises(SpecParseError):
            cli.parse_grid(bad)


def test_eval_gaussian_parallel_sum(tmp_path, capsys):
    spec = tmp_path / "s.json"
    spec.write_text('{"op": "psum", "args": [{"op": "E2"}, {"op": "E2"}]}')
    code, out, _ = run(["eval", "--spec", str(spec), "--grid", "1:3:1"], capsys)
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "t,y_lo,y_hi"
    for line, t in zip(lines[1:], (1.0, 2.0, 3.0)):
        _, lo, hi = map(float, line.split(","))
        assert math.isclose(lo, 2 * math.exp(-t * t / 8), rel_tol=1e-12)


def test_eval_empty_and_parse_errors(tmp_path, capsys):
    spec = tmp_path / "s.json"
    spec.write_text('{"op": "restrict", "lo": -5, "hi": -4, "args": [{"op": "E1"}]}')
    code, out, _ = run(["eval", "--spec", str(spec)], capsys)
    assert code == 0 and out.startswith("# empty operator")
    spec.write_text('{"op": "psum", ')
    code, _, err = run(["eval", "--spec", str(spec)], capsys)
    assert code == 2 and "parse error" in err
    spec.write_text('{"op": "add", "args": [{"op": "E1"}, {"op": "power", "a": 2}]}')
    code, _, err = run(["eval", "--spec", str(spec)], capsys)
    assert code == 3


def test_parse_positions():
    with pytest.raises(SpecParseError) as info:
        parse_text('{"op": "psum" "args": []}')
    assert info.value.position == 14
    with pytest.raises(SpecParseError) as info:
        parse_text('{"op": "psum", "args": [{"op": "E1"}, {"op": "zzz"}]}')
    assert "args[1]" in str(info.value)


def test_verify_exit_codes(tmp_path, capsys):
    out = tmp_path / "r.json"
    code, _, _ = run(["verify", "--scenario", "MAX_GAUSS", "--n", "10", "--seed", "3",
                      "--samples", "20000", "--out", str(out)], capsys)
    assert code == 0 and json.loads(out.read_text())["pass"] is True
    code, _, _ = run(["verify", "--scenario", "MAX_GAUSS", "--seed", "3", "--samples", "20000",
                      "--scale-bound", "0.1", "--out", str(out)], capsys)
    assert code == 1 and json.loads(out.read_text())["violations"]
    code, _, _ = run(["verify", "--scenario", "NOPE"], capsys)
    assert code == 4
    code, _, _ = run(["verify", "--scenario", "SUM3_EXP", "--theta", "3"], capsys)
    assert code == 2


def test_transport_table(capsys):
    code, out, _ = run(["transport", "--source", "laplace", "--target", "cauchy", "--q", "2",
                        "--grid", "0:4:1"], capsys)
    assert code == 0
    rows = [list(map(float, r.split(","))) for r in out.splitlines()[1:]]
    for t, phi, dphi, h in rows:
        assert math.isclose(phi, math.expm1(t / 2), rel_tol=1e-12, abs_tol=1e-15)
        assert dphi <= h
    code, _, _ = run(["transport", "--target", "subexp", "--q", "1.5"], capsys)
    assert code == 2
    code, _, _ = run(["transport", "--target", "foo"], capsys)
    assert code == 2


def test_console_script_entry():
    proc = subprocess.run([sys.executable, "-m", "concop.cli", "verify", "--scenario", "nope"],
                          capture_output=True, text=True)
    assert proc.returncode == 4
