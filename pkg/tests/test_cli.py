import json
from pathlib import Path

import numpy as np
import pytest

from crlab.cli import main
from crlab.config import ConfigError, load_config, parse_config
from crlab.io import read_field

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def run(*args):
    return main([str(a) for a in args])


def test_config_rejects_unknown_keys():
    with pytest.raises(ConfigError):
        parse_config({"grid": {"n_s": 10, "bogus": 1}})
    with pytest.raises(ConfigError):
        parse_config({"extra": {}})
    with pytest.raises(ConfigError):
        parse_config({"solver": {"bc": {"type": "fixed_loops", "left": {"weird": 1}, "right": {"constant": [0, 0]}}}})
    with pytest.raises(ConfigError):
        parse_config({"solver": {"bc": {"type": "s_periodic", "left": {}}}})


def test_config_reads_exponent_strings(tmp_path):
    p = tmp_path / "c.yaml"
    p.write_text("solver: {tol: 1e-9}\nequilibria: {tol: 1e-11}\n")
    cfg = load_config(p)
    assert cfg.solver.tol == 1e-9 and cfg.equilibria.tol == 1e-11


def test_config_digest_is_stable():
    a = parse_config({"grid": {"n_s": 11}, "seed": 3})
    b = parse_config({"seed": 3, "grid": {"n_s": 11}})
    assert a.digest() == b.digest()
    assert a.digest() != parse_config({"grid": {"n_s": 12}, "seed": 3}).digest()


def test_equilibria_commands(tmp_path):
    assert run("equilibria", "--config", CONFIGS / "pendulum.yaml", "--out", tmp_path / "p") == 0
    d = json.loads((tmp_path / "p" / "equilibria.json").read_text())
    assert len(d["equilibria"]) == 2 and "config_sha256" in d
    assert run("equilibria", "--config", CONFIGS / "rotation.yaml", "--out", tmp_path / "r") == 0
    d = json.loads((tmp_path / "r" / "equilibria.json").read_text())
    assert len(d["equilibria"]) == 1 and np.allclose(d["equilibria"][0]["u0"], 0, atol=1e-10)
    none = tmp_path / "none.yaml"
    none.write_text("vectorfield: {tag: custom, p: [[0, 0, 0, 1.0]]}\nequilibria: {seeds: [[0, 0]]}\n")
    assert run("equilibria", "--config", none, "--out", tmp_path / "n") == 3


def test_malformed_config(tmp_path):
    bad = tmp_path / "bad.yaml"
    bad.write_text("grid: [1\n")
    assert run("equilibria", "--config", bad, "--out", tmp_path) == 2
    bad.write_text("vectorfield: {tag: nope}\n")
    assert run("equilibria", "--config", bad, "--out", tmp_path) == 2
    assert run("equilibria", "--config", tmp_path / "missing.yaml", "--out", tmp_path) == 2
    assert run("unknown-command", "--config", bad) == 2


def test_solve_constant_loops(tmp_path):
    assert run("solve", "--config", CONFIGS / "zero_constant.yaml", "--out", tmp_path) == 0
    man = json.loads((tmp_path / "solution.json").read_text())
    assert man["solve"]["converged"] and man["solve"]["newton_iterations"] <= 1
    assert np.allclose(read_field(tmp_path / "solution.crpb").values, [0.3, -0.2])


def test_hopf_pipeline(tmp_path):
    sol = tmp_path / "solution.crpb"
    assert run("solve", "--config", CONFIGS / "hopf.yaml", "--out", tmp_path) == 0
    man = json.loads((tmp_path / "solution.json").read_text())
    assert abs(man["solve"]["period"] - 2 * np.pi) <= 1e-2
    assert run("classify", "--config", CONFIGS / "hopf.yaml", "--out", tmp_path, "--solution", sol) == 0
    ls = json.loads((tmp_path / "limitset.json").read_text())
    assert ls["limitset"]["verdict"] == "PeriodicOrbit"
    assert json.loads((tmp_path / "projection.json").read_text())["projection"]["injective"]
    assert (tmp_path / "w_trace.csv").exists() and (tmp_path / "pi_trajectory.csv").exists()

    short = tmp_path / "short.yaml"
    short.write_text("vectorfield: {tag: hopf}\nequilibria: {seeds: [[0, 0]]}\nanalysis: {window: [0.0, 3.0]}\n")
    assert run("classify", "--config", short, "--out", tmp_path / "short", "--solution", sol) == 5

    shifts = tmp_path / "shifts.yaml"
    shifts.write_text("vectorfield: {tag: hopf}\ngenerate: {kind: shifts, shifts: [0.0, 1.3]}\n")
    assert run("generate", "--config", shifts, "--out", tmp_path / "sh", "--solution", sol) == 0
    a, b = tmp_path / "sh" / "shift_0.crpb", tmp_path / "sh" / "shift_1.crpb"
    assert run("axioms", "--config", shifts, "--out", tmp_path / "sh", "--solution", a, "--solution", b) == 0
    rep = json.loads((tmp_path / "sh" / "axioms.json").read_text())["axioms"]
    assert len(rep["pairs"][0]["w_values"]) == 1

    assert run("plot-data", "--config", CONFIGS / "hopf.yaml", "--out", tmp_path / "pd", "--solution", sol) == 0
    assert (tmp_path / "pd" / "slices.csv").read_text().startswith("s,t,p,q")


@pytest.mark.slow
def test_pendulum_pipeline(tmp_path):
    assert run("solve", "--config", CONFIGS / "pendulum.yaml", "--out", tmp_path) == 0
    assert run("classify", "--config", CONFIGS / "pendulum.yaml", "--out", tmp_path,
               "--solution", tmp_path / "solution.crpb") == 0
    ls = json.loads((tmp_path / "limitset.json").read_text())
    assert ls["limitset"]["verdict"] == "EquilibriaChain"


def test_pendulum_iteration_cap(tmp_path):
    cfg = tmp_path / "p1.yaml"
    cfg.write_text((CONFIGS / "pendulum.yaml").read_text().replace("max_iter: 25", "max_iter: 1"))
    assert run("solve", "--config", cfg, "--out", tmp_path) == 4
    assert (tmp_path / "solution.crpb").exists()


def test_crossing_pair_axioms(tmp_path):
    assert run("generate", "--config", CONFIGS / "crossing_pair.yaml", "--out", tmp_path) == 0
    a, b = tmp_path / "pair_a.crpb", tmp_path / "pair_b.crpb"
    assert run("axioms", "--config", CONFIGS / "crossing_pair.yaml", "--out", tmp_path, "--solution", a, "--solution", b) == 0
    rep = json.loads((tmp_path / "axioms.json").read_text())["axioms"]
    assert [c["post_drop"] for c in rep["pairs"][0]["crossings"]] == [1]
    assert run("axioms", "--config", CONFIGS / "crossing_pair.yaml", "--out", tmp_path / "d",
               "--solution", a, "--solution", a) == 2


def test_axioms_grid_mismatch(tmp_path):
    assert run("generate", "--config", CONFIGS / "crossing_pair.yaml", "--out", tmp_path / "a") == 0
    assert run("generate", "--config", CONFIGS / "zero_mode.yaml", "--out", tmp_path / "b") == 0
    assert run("axioms", "--config", CONFIGS / "crossing_pair.yaml", "--out", tmp_path,
               "--solution", tmp_path / "a" / "pair_a.crpb", "--solution", tmp_path / "b" / "pair_a.crpb") == 2


def test_unreadable_solution(tmp_path):
    junk = tmp_path / "junk.crpb"
    junk.write_bytes(b"not a field")
    assert run("classify", "--config", CONFIGS / "hopf.yaml", "--out", tmp_path, "--solution", junk) == 2


def test_generate_is_deterministic(tmp_path):
    cfg = tmp_path / "bump.yaml"
    cfg.write_text("grid: {n_s: 50, n_t: 16}\ngenerate: {kind: bump, n_modes: 3}\n")
    assert run("generate", "--config", cfg, "--out", tmp_path / "a", "--seed", "7") == 0
    assert run("generate", "--config", cfg, "--out", tmp_path / "b", "--seed", "7") == 0
    assert run("generate", "--config", cfg, "--out", tmp_path / "c", "--seed", "8") == 0
    a, b, c = (read_field(tmp_path / d / "bump.crpb").values for d in "abc")
    assert np.array_equal(a, b) and not np.array_equal(a, c)
    assert json.loads((tmp_path / "a" / "generate.json").read_text())["seed"] == 7
