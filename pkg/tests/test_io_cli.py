import json
import math
import os
from fractions import Fraction

import numpy as np
import pytest

from surfrot import cli
from surfrot.exceptions import EmitRefused
from surfrot.group import HomologyVector
from surfrot.io import canonical, config_hash, csv_text, dumps, emit


# -- emission ----------------------------------------------------------------------

def test_canonical_types():
    out = canonical({"f": 1 / 3, "c": 1 + 2j, "q": Fraction(1, 10), "h": HomologyVector([1, 0]),
                     "a": np.arange(2), "b": np.bool_(True), "n": None})
    assert out == {"f": 0.333333333333, "c": [1.0, 2.0], "q": "1/10", "h": ["1", "0"],
                   "a": [0, 1], "b": True, "n": None}


def test_dumps_is_deterministic():
    a = dumps({"z": 1.0, "a": [0.1 + 0.2, -0.0]})
    b = dumps({"a": [0.30000000000000004, 0.0], "z": 1.0})
    assert a == b
    assert a.endswith("\n")
    assert json.loads(a) == {"a": [0.3, 0.0], "z": 1.0}


@pytest.mark.parametrize("bad", [math.nan, math.inf, -math.inf])
def test_non_finite_refused(bad, tmp_path):
    with pytest.raises(EmitRefused):
        dumps({"x": [1.0, bad]})
    with pytest.raises(EmitRefused):
        emit({"ok": 1.0}, str(tmp_path / "o"), "r", series={"s": (["v"], [[bad]])})
    # nothing is written when a value is refused
    assert not (tmp_path / "o").exists()


def test_empty_report_is_valid(tmp_path):
    paths = emit({}, str(tmp_path), "empty")
    assert json.load(open(paths[0])) == {}
    paths = emit({}, str(tmp_path), "empty", fmt="csv")
    assert open(paths[0]).read() == "key,value\n"


def test_csv_text_and_hash():
    assert csv_text(["a", "b"], [[1, 0.5], [2, Fraction(1, 3)]]) == "a,b\n1,0.5\n2,1/3\n"
    assert config_hash({"a": 1, "b": 2}) == config_hash({"b": 2, "a": 1})
    assert config_hash({"a": 1}) != config_hash({"a": 2})


# -- command line -------------------------------------------------------------------

def _write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return str(p)


def _read_dir(d):
    return {f: open(os.path.join(d, f)).read() for f in sorted(os.listdir(d))}


@pytest.mark.parametrize(
    "cfg",
    [
        "{not json",
        {"scenario": "single-push"},
        {"genus": 2, "scenario": "single-push", "N": 5},
        {"genus": 2, "scenario": "nope"},
        {"genus": 2, "scenario": "single-push", "extra": 1},
        {"genus": 2, "scenario": "single-push", "seeds": [[1.5, 0.0]]},
        {"genus": 2, "scenario": "single-push", "seeds": [[0.95, 0.0]]},
        {"genus": 2, "pushes": [{"coreWord": "a1", "speed": 0.2, "bumpRadius": 5.0}]},
        {"genus": 2, "pushes": [{"coreWord": "zz", "speed": 0.2}]},
    ],
)
def test_config_errors_exit_2(tmp_path, cfg, capsys):
    path = _write(tmp_path, "c.json", cfg)
    assert cli.main(["simulate", path, "--out", str(tmp_path / "o")]) == cli.EXIT_CONFIG
    assert "config error" in capsys.readouterr().err


def test_missing_config_exit_2(tmp_path):
    assert cli.main(["simulate", "--out", str(tmp_path)]) == cli.EXIT_CONFIG
    assert cli.main(["simulate", str(tmp_path / "missing.json")]) == cli.EXIT_CONFIG
    assert cli.main(["polytope", "--out", str(tmp_path)]) == cli.EXIT_CONFIG
    assert cli.main(["selftest-geom", "--jobs", "0"]) == cli.EXIT_CONFIG


def test_numerical_breakdown_exit_3(tmp_path):
    path = _write(tmp_path, "c.json", {"genus": 2, "pushes": [{"coreWord": "a1", "speed": 1e6}], "N": 100})
    assert cli.main(["simulate", path, "--out", str(tmp_path / "o")]) == cli.EXIT_NUMERIC


def test_simulate_is_byte_stable(tmp_path):
    path = _write(tmp_path, "c.json", {"genus": 2, "scenario": "single-push", "N": 200})
    outs = []
    for run in ("a", "b"):
        d = str(tmp_path / run)
        assert cli.main(["simulate", path, "--out", d]) == cli.EXIT_OK
        outs.append(_read_dir(d))
    assert outs[0] == outs[1]
    rep = json.loads(outs[0]["simulate.json"])
    assert rep["provenance"]["command"] == "simulate"
    assert rep["seeds"][0]["homology"] == ["1/10", "0", "0", "0"]
    assert "wall" not in outs[0]["simulate.json"]
    series = outs[0]["series-core-a1.csv"].splitlines()
    assert series[0] == "n,L_n,theta_n,residual_n,h0,h1,h2,h3"
    assert len(series) == 202


def test_estimate_with_explicit_seed(tmp_path, capsys):
    path = _write(tmp_path, "c.json", {"genus": 2, "scenario": "single-push", "N": 200, "seeds": [[0.05, 0.02]]})
    assert cli.main(["estimate", path, "--out", str(tmp_path), "--format", "csv"]) == cli.EXIT_OK
    assert "seed-0" in capsys.readouterr().out
    assert os.path.exists(tmp_path / "estimate.csv")


def test_polytope_command(tmp_path, capsys):
    assert cli.main(["polytope", "figures/fig11-left.json", "--out", str(tmp_path)]) == cli.EXIT_OK
    lines = capsys.readouterr().out.split("\n")
    assert [l for l in lines if l.startswith("vertex")] == ["vertex 0 0", "vertex 0 1", "vertex 1 0"]
    rep = json.load(open(tmp_path / "polytope.json"))
    assert rep["polytope"]["vertices"] == [["0", "0"], ["0", "1"], ["1", "0"]]
    bad = _write(tmp_path, "g.json", {"nodes": ["a"], "edges": [{"from": "a", "to": "b", "label": [1]}]})
    assert cli.main(["polytope", bad, "--out", str(tmp_path)]) == cli.EXIT_CONFIG


def test_selftest_and_build_surface(tmp_path):
    assert cli.main(["selftest-geom", "--samples", "200", "--out", str(tmp_path)]) == cli.EXIT_OK
    rows = open(tmp_path / "selftest-geom-residuals.csv").read().splitlines()
    assert rows[0] == "check,n,value,tolerance,pass" and len(rows) > 1
    assert cli.main(["build-surface", "--genus", "3", "--out", str(tmp_path)]) == cli.EXIT_OK
    rep = json.load(open(tmp_path / "surface.json"))
    assert rep["provenance"]["version"]
    assert cli.main(["build-surface", "--genus", "1", "--out", str(tmp_path)]) == cli.EXIT_FAIL


def test_torus_command(tmp_path):
    cfg = _write(tmp_path, "t.json", {"T": 200.0, "length": 1000, "seeds": [[0.3, 0.1]]})
    assert cli.main(["torus", "--config", cfg, "--out", str(tmp_path)]) == cli.EXIT_OK
    rep = json.load(open(tmp_path / "torus.json"))
    assert rep["cutting"]["balanced_prefix"]
    assert len(open(tmp_path / "cutting-sequence.txt").read().strip()) == 1000
    bad = _write(tmp_path, "b.json", {"alpha": 1.5})
    assert cli.main(["torus", "--config", bad, "--out", str(tmp_path)]) == cli.EXIT_CONFIG
