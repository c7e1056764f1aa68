"""Run configuration: a YAML file with nested blocks, strictly validated.

Example::

    vectorfield: {tag: hamiltonian, name: pendulum}
    grid: {s_min: -20, s_max: 20, n_s: 401, n_t: 16}
    equilibria: {seeds: [[0, 0], [0.5, 0]]}
    solver:
      tol: 1.0e-9
      bc:
        type: fixed_loops
        left: {equilibrium_near: [0, 0]}
        right: {equilibrium_near: [0.5, 0]}
    analysis: {t0: 0.0, tail_fraction: 0.25}
    output: {dir: runs/pendulum}
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Optional

import yaml


class ConfigError(ValueError):
    pass


def _take(block: dict, cls, where: str):
    if block is None:
        return cls()
    if not isinstance(block, dict):
        raise ConfigError(f"{where}: expected a mapping")
    names = {f.name for f in fields(cls)}
    unknown = set(block) - names
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    block = dict(block)
    for f in fields(cls):
        # PyYAML reads 1e-9 (no dot) as a string
        if f.type in ("float", "Optional[float]") and isinstance(block.get(f.name), str):
            try:
                block[f.name] = float(block[f.name])
            except ValueError:
                raise ConfigError(f"{where}.{f.name}: not a number") from None
    try:
        return cls(**block)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc


@dataclass
class GridBlock:
    s_min: float = 0.0
    s_max: float = 1.0
    n_s: int = 201
    n_t: int = 64


@dataclass
class SolverBlock:
    tol: float = 1e-9
    max_iter: int = 25
    bound: float = 1.0
    damping_floor: float = 2.0**-10
    repeats: int = 8
    bc: Optional[dict] = None


@dataclass
class EquilibriaBlock:
    seeds: Optional[list] = None
    tol: float = 1e-10
    n_steps: int = 512
    escape_radius: float = 100.0


@dataclass
class AnalysisBlock:
    t0: float = 0.0
    delta_valid: Optional[float] = None
    tail_fraction: float = 0.25
    n_samples: int = 64
    recurrence_tol: float = 1e-3
    eq_tol: float = 1e-3
    window: Optional[list] = None


@dataclass
class GenerateBlock:
    kind: str = "crossing_pair"
    point: Optional[list] = None
    k: int = 1
    amplitude: float = 1.0
    level: float = 0.5
    b: float = 0.5
    n_modes: int = 0
    shifts: Optional[list] = None
    n_slices: Optional[int] = None


@dataclass
class RunConfig:
    vectorfield: dict = field(default_factory=lambda: {"tag": "zero"})
    grid: GridBlock = field(default_factory=GridBlock)
    solver: SolverBlock = field(default_factory=SolverBlock)
    equilibria: EquilibriaBlock = field(default_factory=EquilibriaBlock)
    analysis: AnalysisBlock = field(default_factory=AnalysisBlock)
    generate: GenerateBlock = field(default_factory=GenerateBlock)
    output: dict = field(default_factory=lambda: {"dir": "out"})
    seed: int = 0
    raw: dict = field(default_factory=dict, repr=False)

    def digest(self) -> str:
        """SHA-256 of the canonical JSON form of the parsed file."""
        blob = json.dumps(self.raw, sort_keys=True, separators=(",", ":"), default=str)
        return hashlib.sha256(blob.encode()).hexdigest()

    def manifest(self) -> dict:
        d = asdict(self)
        d.pop("raw")
        return {"config_sha256": self.digest(), "config": d}


_BLOCKS = {
    "grid": GridBlock,
    "solver": SolverBlock,
    "equilibria": EquilibriaBlock,
    "analysis": AnalysisBlock,
    "generate": GenerateBlock,
}
_TOP = set(_BLOCKS) | {"vectorfield", "output", "seed"}


def parse_config(data: dict) -> RunConfig:
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a mapping")
    unknown = set(data) - _TOP
    if unknown:
        raise ConfigError(f"unknown top-level keys {sorted(unknown)}")
    kw = {name: _take(data.get(name), cls, name) for name, cls in _BLOCKS.items()}
    vf = data.get("vectorfield", {"tag": "zero"})
    if not isinstance(vf, dict) or "tag" not in vf:
        raise ConfigError("vectorfield: expected a mapping with a 'tag'")
    out = data.get("output", {"dir": "out"})
    if not isinstance(out, dict) or set(out) - {"dir"}:
        raise ConfigError("output: only the 'dir' key is allowed")
    seed = data.get("seed", 0)
    if not isinstance(seed, int):
        raise ConfigError("seed must be an integer")
    bc = kw["solver"].bc
    if bc is not None:
        _check_bc(bc)
    return RunConfig(vf, output=out, seed=seed, raw=data, **kw)


def _check_bc(bc):
    if not isinstance(bc, dict) or "type" not in bc:
        raise ConfigError("solver.bc: expected a mapping with a 'type'")
    allowed = {
        "fixed_loops": {"type", "left", "right"},
        "s_periodic": {"type", "period_guess", "radius"},
    }
    if bc["type"] not in allowed:
        raise ConfigError(f"solver.bc.type must be one of {sorted(allowed)}")
    unknown = set(bc) - allowed[bc["type"]]
    if unknown:
        raise ConfigError(f"solver.bc: unknown keys {sorted(unknown)}")
    if bc["type"] == "fixed_loops":
        for side in ("left", "right"):
            spec = bc.get(side)
            if not isinstance(spec, dict) or len(spec) != 1 or \
                    next(iter(spec)) not in {"constant", "equilibrium_near", "mode"}:
                raise ConfigError(f"solver.bc.{side}: expected one of constant, equilibrium_near, mode")


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text()
        data = yaml.safe_load(text)
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read configuration {path}: {exc}") from exc
    return parse_config(data)
