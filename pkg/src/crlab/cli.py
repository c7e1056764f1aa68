"""Command-line front end.

Subcommands: ``equilibria``, ``solve``, ``classify``, ``axioms``, ``generate``,
``plot-data``.  Exit codes: 0 success, 1 axiom violations, 2 bad input
(configuration, unreadable artifact, grid mismatch, diagonal pair), 3 no
equilibria, 4 solver non-convergence, 5 undetermined limit set.
"""
from __future__ import annotations

import argparse
import logging
import sys
from itertools import combinations
from pathlib import Path

import numpy as np

from . import analytic
from .config import ConfigError, RunConfig, load_config
from .cylinder import CylinderGrid, Field, Loop, TimeGrid
from .equilibria import find_equilibria
from .errors import CRLabError, GridMismatchError
from .io import read_field, write_field, write_json, write_loop_csv, write_rows_csv
from .limitset import (CHAIN, PERIODIC, ClassifyConfig, classify_omega, equilibrium_winding,
                       orbit_winding_values, project, projection_injectivity, shifted_window)
from .lyapunov import axioms_report, w_trace
from .solver import (FixedLoops, SolverConfig, SPeriodic, circular_initial, linear_initial,
                     newton_solve)
from .vectorfield import make_vectorfield

EXIT_OK = 0
EXIT_VIOLATIONS = 1
EXIT_INPUT = 2
EXIT_NO_EQUILIBRIA = 3
EXIT_NO_CONVERGENCE = 4
EXIT_UNDETERMINED = 5

log = logging.getLogger("crlab")


def _grid(cfg: RunConfig) -> CylinderGrid:
    g = cfg.grid
    return CylinderGrid.build(g.s_min, g.s_max, g.n_s, g.n_t)


def _spec(cfg: RunConfig):
    return make_vectorfield(**cfg.vectorfield)


def _equilibria(cfg: RunConfig, spec, time: TimeGrid):
    e = cfg.equilibria
    return find_equilibria(spec, e.seeds, tol=e.tol, time=time, n_steps=e.n_steps,
                           escape_radius=e.escape_radius)


def _manifest(cfg: RunConfig, **extra) -> dict:
    out = cfg.manifest()
    out["seed"] = cfg.seed
    out.update(extra)
    return out


def _grid_dict(g: CylinderGrid) -> dict:
    return {"s_min": g.s_min, "s_max": g.s_max, "n_s": g.n_s, "n_t": g.n_t}


def cmd_equilibria(cfg: RunConfig, out: Path) -> int:
    spec = _spec(cfg)
    eqs = _equilibria(cfg, spec, TimeGrid(cfg.grid.n_t))
    write_json(out / "equilibria.json", _manifest(
        cfg, equilibria=[e.to_dict() | {"liouville_defect": e.liouville_defect()} for e in eqs],
        seed_status=eqs.seed_status))
    rows = [(i, t, p, q) for i, e in enumerate(eqs) for t, (p, q) in zip(e.loop.time.nodes, e.loop.values)]
    write_rows_csv(out / "equilibria.csv", ["index", "t", "p", "q"], rows)
    log.info("found %d equilibria", len(eqs))
    return EXIT_OK if eqs else EXIT_NO_EQUILIBRIA


def _boundary_loop(side: dict, grid: CylinderGrid, s: float, spec, cfg: RunConfig) -> Loop:
    (kind, arg), = side.items()
    if kind == "constant":
        return Loop.constant(grid.time, arg)
    if kind == "mode":
        arg = arg or {}
        return analytic.mode_loop(grid, s, int(arg.get("k", 1)), float(arg.get("amplitude", 1.0)))
    eqs = find_equilibria(spec, [arg], tol=cfg.equilibria.tol, time=grid.time, n_steps=cfg.equilibria.n_steps)
    if not eqs:
        raise CRLabError(f"no equilibrium found near {arg}")
    return eqs[0].loop


def cmd_solve(cfg: RunConfig, out: Path) -> int:
    spec = _spec(cfg)
    s = cfg.solver
    if s.bc is None:
        raise ConfigError("solver.bc is required for solve")
    scfg = SolverConfig(tol=s.tol, max_iter=s.max_iter, bound=s.bound, damping_floor=s.damping_floor,
                        repeats=s.repeats, t0=cfg.analysis.t0)
    grid = _grid(cfg)
    if s.bc["type"] == "fixed_loops":
        left = _boundary_loop(s.bc["left"], grid, grid.s_min, spec, cfg)
        right = _boundary_loop(s.bc["right"], grid, grid.s_max, spec, cfg)
        bc = FixedLoops(left, right)
        initial = linear_initial(grid, left, right)
    else:
        period = float(s.bc.get("period_guess", 2 * np.pi))
        grid = CylinderGrid(grid.s_min, grid.s_min + period, grid.n_s, grid.time)
        bc = SPeriodic(period)
        initial = circular_initial(grid, float(s.bc.get("radius", 0.8)))
    report = newton_solve(spec, initial, bc, scfg)
    write_field(out / "solution.crpb", report.field)
    write_json(out / "solution.json", _manifest(
        cfg, solve=report.to_dict(), grid=_grid_dict(report.field.grid), bc=s.bc["type"],
        vectorfield=spec.to_dict(), field_file="solution.crpb"))
    log.info("solve: converged=%s residual=%.3e iterations=%d %s", report.converged,
             report.residual_sup, report.newton_iterations, report.message)
    return EXIT_OK if report.converged else EXIT_NO_CONVERGENCE


def _window(u: Field, window) -> Field:
    if not window:
        return u
    a, b = float(window[0]), float(window[1])
    keep = (u.grid.s_nodes >= a - 1e-12) & (u.grid.s_nodes <= b + 1e-12)
    idx = np.flatnonzero(keep)
    if idx.size < 3:
        raise ConfigError("analysis.window keeps fewer than three slices")
    s = u.grid.s_nodes[idx]
    return Field(CylinderGrid(float(s[0]), float(s[-1]), idx.size, u.grid.time), u.values[idx])


def _read_solution(path) -> Field:
    try:
        return read_field(path)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"unreadable solution artifact {path}: {exc}") from exc


def _pi_rows(u: Field, t0: float):
    return [(s, *project(u, s, t0)) for s in u.grid.s_nodes]


def cmd_classify(cfg: RunConfig, out: Path, solutions) -> int:
    if len(solutions) != 1:
        raise ConfigError("classify takes exactly one --solution")
    u = _window(_read_solution(solutions[0]), cfg.analysis.window)
    spec = _spec(cfg)
    eqs = _equilibria(cfg, spec, u.grid.time)
    a = cfg.analysis
    report = classify_omega(u, eqs, ClassifyConfig(a.tail_fraction, a.recurrence_tol, a.eq_tol))
    body = report.to_dict()
    write_rows_csv(out / "pi_trajectory.csv", ["sigma", "p", "q"], _pi_rows(u, a.t0))
    if report.verdict == PERIODIC:
        proj = projection_injectivity(u, report, a.t0, a.n_samples)
        write_json(out / "projection.json", _manifest(cfg, projection=proj.to_dict()))
        body["orbit_winding_values"] = sorted(set(orbit_winding_values(u, report)))
        lag = report.period / 4
        n = u.grid.n_s - int(np.ceil(lag / u.grid.ds)) - 1
        tr = w_trace(shifted_window(u, 0.0, n), shifted_window(u, lag, n), a.delta_valid)
    elif report.verdict == CHAIN:
        omega = [m for m in report.matches if "omega" in m["ends"]][0]
        tr, s_bar = equilibrium_winding(u, eqs[omega["equilibrium"]], a.delta_valid)
        body["omega_winding_constant_from"] = s_bar
    else:
        tr = None
    if tr is not None:
        write_rows_csv(out / "w_trace.csv", ["s", "W", "separation", "valid"], tr.rows())
    write_json(out / "limitset.json", _manifest(cfg, limitset=body, solution=str(solutions[0])))
    log.info("classify: %s", report.verdict)
    return EXIT_UNDETERMINED if report.verdict not in (PERIODIC, CHAIN) else EXIT_OK


def cmd_axioms(cfg: RunConfig, out: Path, solutions) -> int:
    if len(solutions) < 2:
        raise ConfigError("axioms needs at least two --solution artifacts")
    fields_ = [_read_solution(p) for p in solutions]
    if len({f.grid for f in fields_}) > 1:
        raise GridMismatchError("solution artifacts live on different grids")
    pairs = list(combinations(range(len(fields_)), 2))
    rep = axioms_report(fields_, pairs, cfg.analysis.delta_valid, cfg.analysis.t0)
    write_json(out / "axioms.json", _manifest(cfg, axioms=rep, solutions=[str(p) for p in solutions]))
    if rep["diagonal_pairs"]:
        log.error("pairs %s coincide: no valid samples", rep["diagonal_pairs"])
        return EXIT_INPUT
    return EXIT_OK if rep["passed"] else EXIT_VIOLATIONS


def cmd_generate(cfg: RunConfig, out: Path, solutions) -> int:
    g = cfg.generate
    grid = _grid(cfg)
    written = {}
    if g.kind == "constant":
        written["constant.crpb"] = Field.constant(grid, g.point or (0.0, 0.0))
    elif g.kind == "holomorphic_mode":
        written["mode.crpb"] = analytic.holomorphic_mode(grid, g.k, g.amplitude)
    elif g.kind == "crossing_pair":
        a, b = analytic.crossing_pair(grid, g.level)
        written.update({"pair_a.crpb": a, "pair_b.crpb": b})
    elif g.kind == "two_mode_pair":
        a, b = analytic.two_mode_pair(grid, g.b)
        written.update({"pair_a.crpb": a, "pair_b.crpb": b})
    elif g.kind == "bump":
        written["bump.crpb"] = analytic.bump_field(grid, cfg.seed, g.n_modes)
    elif g.kind == "shifts":
        if len(solutions) != 1 or not g.shifts:
            raise ConfigError("generate kind 'shifts' needs one --solution and a shifts list")
        u = _read_solution(solutions[0])
        n = g.n_slices or u.grid.n_s - int(np.ceil(max(g.shifts) / u.grid.ds)) - 1
        for i, sig in enumerate(g.shifts):
            written[f"shift_{i}.crpb"] = shifted_window(u, float(sig), n)
    else:
        raise ConfigError(f"unknown generate kind {g.kind!r}")
    for name, f in written.items():
        write_field(out / name, f)
    write_json(out / "generate.json", _manifest(cfg, files=sorted(written), grid=_grid_dict(
        next(iter(written.values())).grid)))
    return EXIT_OK


def cmd_plot_data(cfg: RunConfig, out: Path, solutions) -> int:
    if len(solutions) != 1:
        raise ConfigError("plot-data takes exactly one --solution")
    u = _window(_read_solution(solutions[0]), cfg.analysis.window)
    rows = [(s, t, p, q) for s, loop in zip(u.grid.s_nodes, u.values)
            for t, (p, q) in zip(u.grid.time.nodes, loop)]
    write_rows_csv(out / "slices.csv", ["s", "t", "p", "q"], rows)
    write_rows_csv(out / "pi_trajectory.csv", ["sigma", "p", "q"], _pi_rows(u, cfg.analysis.t0))
    write_loop_csv(out / "loop_first.csv", u.slice(0))
    write_loop_csv(out / "loop_last.csv", u.slice(u.grid.n_s - 1))
    return EXIT_OK


COMMANDS = {
    "equilibria": lambda c, o, s: cmd_equilibria(c, o),
    "solve": lambda c, o, s: cmd_solve(c, o),
    "classify": cmd_classify,
    "axioms": cmd_axioms,
    "generate": cmd_generate,
    "plot-data": cmd_plot_data,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="crlab", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", required=True, help="YAML run configuration")
    ap.add_argument("--out", help="output directory (overrides output.dir)")
    ap.add_argument("--solution", action="append", default=[], help="field artifact; repeatable")
    ap.add_argument("--seed", type=int, help="overrides the configured seed")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg.seed = args.seed
            cfg.raw = dict(cfg.raw, seed=args.seed)
        out = Path(args.out or cfg.output.get("dir", "out"))
        out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](cfg, out, args.solution)
    except (ConfigError, GridMismatchError) as exc:
        log.error("%s", exc)
        return EXIT_INPUT
    except CRLabError as exc:
        log.error("%s", exc)
        return EXIT_NO_CONVERGENCE if args.command == "solve" else EXIT_INPUT
    except (ValueError, TypeError) as exc:
        log.error("invalid configuration: %s", exc)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
