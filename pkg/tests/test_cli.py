import csv
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from cyclestab import cli
from cyclestab.config import Config, ConfigError, load_config, parse_config
from cyclestab.duality import AveragingSet, build_chi
from cyclestab.poly import NumericalDisagreement, schur_test

from oracles import EX1_A


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def ex1(tmp_path, capsys):
    path = tmp_path / "ex1.json"
    assert run(capsys, "design", "--target", "point:2", "--T", "1", "--out", str(path))[0] == 0
    return path


@pytest.fixture
def ex2(tmp_path, capsys):
    path = tmp_path / "ex2.json"
    assert run(capsys, "design", "--target", "point:-2", "--out", str(path))[0] == 0
    return path


# --- parsing


def test_parse_complex():
    assert cli.parse_complex("2-1.5i") == 2 - 1.5j
    assert cli.parse_complex("-2") == -2
    assert cli.parse_complex("3j") == 3j
    with pytest.raises(cli.UsageError):
        cli.parse_complex("two")


def test_parse_target():
    assert cli.parse_target("point:2+0i").mu == 2
    assert cli.parse_target("segment:7").kind == "real_segment"
    assert cli.parse_target("horocycle:4").mu_M == 4
    s = cli.parse_target("sector:3,1.2")
    assert s.theta == 1.2
    for bad in ("blob:3", "segment:0.5", "sector:3", "point:x"):
        with pytest.raises(cli.UsageError):
            cli.parse_target(bad)


def test_dumps_format():
    text = cli.dumps({"b": 1, "a": [0.1, 2.0, 1 + 2j], "c": None, "d": True})
    assert text.index('"b"') < text.index('"a"')
    assert "0.10000000000000001" in text and "2.0" in text
    assert json.loads(text)["a"][2] == [1.0, 2.0]


# --- design


def test_design_point2(capsys):
    code, out, _ = run(capsys, "design", "--target", "point:2", "--T", "1")
    d = json.loads(out)
    assert code == 0 and d["n"] == 4 and d["method"] == "simplest"
    a = [complex(*x) for x in d["a"]]
    assert np.allclose(a, EX1_A, atol=1e-12)
    assert d["p_ascending"] == d["a"][::-1]
    assert d["verified"] and d["probes_passed"] == d["probes_total"] == 1
    assert d["lower_bound"] == pytest.approx(math.log2(3))


def test_design_point_minus2(capsys):
    code, out, _ = run(capsys, "design", "--target", "point:-2", "--T", "1")
    assert code == 0 and json.loads(out)["n"] == 2


def test_design_point1_not_found(capsys):
    code, out, err = run(capsys, "design", "--target", "point:1", "--T", "1")
    assert code == 2 and out == "" and "no design" in err


def test_design_malformed_target(capsys):
    assert run(capsys, "design", "--target", "circle:3")[0] == 64


def test_design_deterministic(capsys):
    outs = [run(capsys, "design", "--target", "segment:6")[1] for _ in range(2)]
    assert outs[0] == outs[1]


def test_design_round_trip(tmp_path, capsys):
    path = tmp_path / "seg.json"
    assert run(capsys, "design", "--target", "segment:6", "--out", str(path))[0] == 0
    d = json.loads(path.read_text())
    assert d["verified"]
    design = cli.design_from_dict(d)
    M = cli.target_from_dict(d["target"])
    for mu in M.probes():
        code, out, _ = run(capsys, "check", "--design", str(path), "--mu", repr(float(mu.real)))
        rep = json.loads(out)
        assert code == 0 and rep["stable"] and rep["agree"]
    assert design.n == d["n"]


def test_design_T2(capsys):
    code, out, _ = run(capsys, "design", "--target", "segment:5", "--T", "2")
    d = json.loads(out)
    assert code == 0 and d["T"] == 2 and d["method"] == "iterated_starlike" and d["verified"]


# --- check


def test_check_example1(ex1, capsys):
    code, out, _ = run(capsys, "check", "--design", str(ex1), "--mu", "2")
    rep = json.loads(out)
    assert code == 0 and rep["stable"] and rep["agree"]
    assert rep["schur"]["max_modulus"] == pytest.approx(math.sqrt(2 - math.sqrt(2)), abs=1e-9)


def test_check_mu8_matches_schur(ex1, capsys):
    code, out, _ = run(capsys, "check", "--design", str(ex1), "--mu", "8")
    rep = json.loads(out)
    assert rep["stable"] == schur_test(build_chi(AveragingSet(EX1_A), 8)).stable


def test_check_real_design(tmp_path, capsys):
    path = tmp_path / "real.json"
    path.write_text(json.dumps({"T": 1, "a": [[0.5, 0], [0.3, 0], [0.2, 0]]}))
    code, out, _ = run(capsys, "check", "--design", str(path), "--mu", "1.5")
    assert code == 0 and not json.loads(out)["stable"]


def test_check_disagreement_exit3(ex1, capsys, monkeypatch):
    def boom(*args, **kwargs):
        raise NumericalDisagreement("forced")

    monkeypatch.setattr(cli, "in_stability_domain", boom)
    code, _, err = run(capsys, "check", "--design", str(ex1), "--mu", "2")
    assert code == 3 and "disagree" in err


def test_check_bad_inputs(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "check", "--design", str(bad), "--mu", "2")[0] == 64
    assert run(capsys, "check", "--design", str(tmp_path / "missing"), "--mu", "2")[0] == 64
    bad.write_text(json.dumps({"a": [[0.5, 0]]}))
    assert run(capsys, "check", "--design", str(bad), "--mu", "2")[0] == 64


# --- boundary


def _curve(text):
    rows = list(csv.reader(text.splitlines()))
    assert rows[0] == ["phi", "re", "im"]
    return np.array([[float(x) for x in r] for r in rows[1:]])


def test_boundary_cardioid(capsys):
    code, out, _ = run(capsys, "boundary", "--n", "2", "--resolution", "64")
    c = _curve(out)
    z = c[:, 1] + 1j * c[:, 2]
    assert code == 0 and len(c) == 64
    assert np.allclose(np.abs(z - 1), 2 * (1 + np.cos(c[:, 0])))


def test_boundary_sextic_and_circle(tmp_path, capsys):
    path = tmp_path / "b.csv"
    assert run(capsys, "boundary", "--n", "3", "--out", str(path))[0] == 0
    c = _curve(path.read_text())
    z = c[:, 1] + 1j * c[:, 2]
    assert np.allclose(z, 1 - 8 * np.cos(c[:, 0] / 3) ** 3 * np.exp(1j * c[:, 0]))
    c1 = _curve(run(capsys, "boundary", "--n", "1", "--resolution", "16")[1])
    assert np.allclose(np.hypot(c1[:, 1], c1[:, 2]), 1)


def test_boundary_errors(tmp_path, capsys):
    assert run(capsys, "boundary", "--n", "0")[0] == 64
    assert run(capsys, "boundary", "--n", "2", "--resolution", "4")[0] == 64
    assert run(capsys, "boundary", "--n", "2", "--out", str(tmp_path / "no" / "x.csv"))[0] == 64


# --- simulate


def test_simulate_example2(ex2, tmp_path, capsys):
    traj = tmp_path / "t.csv"
    code, out, _ = run(
        capsys, "simulate", "--map", "quadratic:-2", "--design", str(ex2),
        "--z0", "-0.9", "--steps", "500", "--csv", str(traj),
    )
    s = json.loads(out)
    assert code == 0 and s["converged"] and s["final_distance"] < 1e-8
    assert s["cycle"] == [[-1.0, 0.0]]
    assert abs(s["empirical_rate"] - s["predicted_rate"]) <= 0.2 * s["predicted_rate"]
    assert traj.read_text().splitlines()[0] == "step,re,im,distance"


def test_simulate_plain(ex2, capsys):
    code, out, _ = run(
        capsys, "simulate", "--map", "quadratic:-2", "--design", str(ex2), "--z0", "-0.9", "--plain",
    )
    s = json.loads(out)
    assert code == 0 and s["plain"] and not s["converged"] and not s["escaped"]


def test_simulate_plain_escape(capsys):
    code, out, _ = run(capsys, "simulate", "--map", "quadratic:0", "--z0", "1.02", "--steps", "100")
    s = json.loads(out)
    assert s["escaped"] and not s["converged"]


def test_simulate_example1(ex1, capsys):
    code, out, _ = run(
        capsys, "simulate", "--map", "quadratic:0", "--design", str(ex1), "--z0", "1.001",
    )
    s = json.loads(out)
    assert code == 0 and s["converged"] and s["cycle"] == [[1.0, 0.0]]
    code, out, _ = run(
        capsys, "simulate", "--map", "quadratic:0", "--design", str(ex1), "--z0", "1.02",
    )
    assert code == 0 and not json.loads(out)["converged"]


def test_simulate_no_cycle(capsys):
    # at c = -3/4 the 2-cycle collapses onto the fixed point -1/2
    code, _, err = run(capsys, "simulate", "--map", "quadratic:-0.75", "--T", "2", "--z0", "0")
    assert code == 2 and "no cycle" in err


def test_simulate_bad_map(capsys):
    assert run(capsys, "simulate", "--map", "tent:2", "--z0", "0")[0] == 64
    assert run(capsys, "simulate", "--map", "poly:1,2", "--z0", "0")[0] == 64


# --- find-cycles and bounds


def test_find_cycles(capsys):
    code, out, _ = run(capsys, "find-cycles", "--map", "quadratic:-1", "--T", "2")
    cs = json.loads(out)
    two = [c for c in cs if c["period"] == 2]
    assert code == 0 and len(two) == 1
    assert sorted(p[0] for p in two[0]["points"]) == pytest.approx([-1, 0])


def test_find_cycles_too_long(capsys):
    assert run(capsys, "find-cycles", "--map", "quadratic:-1", "--T", "9")[0] == 64


def test_bounds(capsys):
    code, out, _ = run(capsys, "bounds", "--target", "point:-15")
    b = json.loads(out)
    assert code == 0 and b["lower_bound"] == pytest.approx(4) and b["certified"]
    b1 = json.loads(run(capsys, "bounds", "--target", "point:1")[1])
    assert b1["infeasible"] and b1["real_impossible"]
    bs = json.loads(run(capsys, "bounds", "--target", "sector:9,1")[1])
    assert bs["advisory"]


# --- usage and config


def test_usage_errors(capsys):
    with pytest.raises(SystemExit) as e:
        cli.main([])
    assert e.value.code == 64
    with pytest.raises(SystemExit) as e:
        cli.main(["design"])
    assert e.value.code == 64
    with pytest.raises(SystemExit) as e:
        cli.main(["design", "--target", "point:2", "--T", "0"])
    assert e.value.code == 64


def test_config_parsing():
    d = parse_config("strictness = 1e-8\nmax_order = 10  # cap\n")
    assert d == {"strictness": 1e-8, "max_order": 10}
    with pytest.raises(ConfigError):
        parse_config("bogus = 1")
    with pytest.raises(ConfigError):
        parse_config("max_order = many")
    with pytest.raises(ConfigError):
        Config(strictness=0)


def test_config_precedence(tmp_path, capsys, monkeypatch):
    cfg = tmp_path / "c.ini"
    cfg.write_text("max_order = 3\n")
    monkeypatch.setenv("CYCLESTAB_CONFIG", str(cfg))
    assert load_config().max_order == 3
    # the file caps the order below what segment:20 needs
    assert run(capsys, "design", "--target", "segment:20")[0] == 2
    # a flag wins over the file
    assert run(capsys, "--max-order", "64", "design", "--target", "segment:20")[0] == 0


def test_config_missing_file(capsys, tmp_path):
    assert run(capsys, "--config", str(tmp_path / "nope"), "bounds", "--target", "point:2")[0] == 64


def test_module_entry_point(tmp_path):
    r = subprocess.run(
        [sys.executable, "-m", "cyclestab", "bounds", "--target", "segment:100"],
        capture_output=True, text=True, check=False,
    )
    assert r.returncode == 0
    assert json.loads(r.stdout)["lower_bound"] == pytest.approx(5)
