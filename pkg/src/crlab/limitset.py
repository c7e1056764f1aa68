"""Translation flow, limit-set classification and the projection report.

The s-translation acts on computed fields by reading off shifted slices.  A
tail window of a long solve stands in for the omega-limit set: it is declared
periodic when the slice trajectory recurs in the sup metric, or an equilibria
chain when the terminal slices settle on known equilibria.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .cylinder import CylinderGrid, Field, Loop, ds_array, fourier_interpolate
from .errors import AliasingError, OutOfWindowError, PreconditionError, ZeroProximityError
from .lyapunov import w_trace, winding_number

PERIODIC = "PeriodicOrbit"
CHAIN = "EquilibriaChain"
UNDETERMINED = "Undetermined"


def _locate(grid: CylinderGrid, sigma: float):
    span = grid.s_max - grid.s_min
    eps = 1e-12 * max(1.0, span)
    if not grid.s_min - eps <= sigma <= grid.s_max + eps:
        raise OutOfWindowError(f"sigma = {sigma} outside [{grid.s_min}, {grid.s_max}]")
    x = (min(max(sigma, grid.s_min), grid.s_max) - grid.s_min) / grid.ds
    i = min(int(np.floor(x)), grid.n_s - 2)
    return i, x - i


def shift(u: Field, sigma: float) -> Loop:
    """The slice ``u(sigma, .)``, linearly interpolated between stored s-lines."""
    i, lam = _locate(u.grid, sigma)
    if lam == 0.0:
        return u.slice(i)
    return Loop(u.grid.time, (1 - lam) * u.values[i] + lam * u.values[i + 1])


def project(u: Field, sigma: float, t0: float) -> np.ndarray:
    """``u(sigma, t0)``: the shifted slice evaluated at one point of the circle."""
    return fourier_interpolate(shift(u, sigma).values, t0)


def shifted_window(u: Field, sigma: float, n_s: int) -> Field:
    """The field ``(s, t) -> u(s + sigma, t)`` on ``n_s`` lines starting at ``s_min``."""
    g = u.grid
    grid = CylinderGrid(g.s_min, g.s_min + (n_s - 1) * g.ds, n_s, g.time)
    vals = np.array([shift(u, s + sigma).values for s in grid.s_nodes])
    return Field(grid, vals)


@dataclass
class ClassifyConfig:
    tail_fraction: float = 0.25
    recurrence_tol: float = 1e-3
    eq_tol: float = 1e-3
    #: a recurrence is sharp when the distance profile rises this many times above its minimum
    sharpness: float = 10.0

    def __post_init__(self):
        if not 0 < self.tail_fraction <= 1:
            raise ValueError("tail_fraction must lie in (0, 1]")


@dataclass
class LimitSetReport:
    verdict: str
    period: Optional[float] = None
    representative: Optional[Field] = None
    matches: List[dict] = field(default_factory=list)
    reason: str = ""
    evidence: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {"verdict": self.verdict, "evidence": self.evidence}
        if self.verdict == PERIODIC:
            g = self.representative.grid
            out["period"] = self.period
            out["representative_window"] = [g.s_min, g.s_max]
        elif self.verdict == CHAIN:
            out["matches"] = self.matches
        else:
            out["reason"] = self.reason
        return out


@dataclass
class ProjectionReport:
    t0: float
    points: np.ndarray
    min_pairwise_distance: float
    injective: bool
    delta_inj: float
    sigmas: np.ndarray

    def to_dict(self) -> dict:
        return {
            "t0": self.t0,
            "points": np.asarray(self.points).tolist(),
            "sigmas": np.asarray(self.sigmas).tolist(),
            "min_pairwise_distance": self.min_pairwise_distance,
            "delta_inj": self.delta_inj,
            "injective": self.injective,
        }


def _sup_dist(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.max(np.linalg.norm(a - b, axis=-1)))


def _eq_loop_values(eq, time) -> np.ndarray:
    loop = eq.loop
    if loop.time == time:
        return loop.values
    return fourier_interpolate(loop.values, time.nodes)


def recurrence_profile(values: np.ndarray) -> np.ndarray:
    """``d[L]`` = mean over the window of the sup-distance between slices L apart."""
    n = values.shape[0]
    d = np.full(n, np.nan)
    d[0] = 0.0
    for lag in range(1, n):
        diff = np.linalg.norm(values[lag:] - values[:-lag], axis=-1)
        d[lag] = float(np.mean(np.max(diff, axis=-1)))
    return d


def _find_period(d: np.ndarray, tol: float, sharpness: float):
    """First sharp local minimum of the recurrence profile at or below ``tol``."""
    n = len(d)
    peak = 0.0
    climbed = False
    for lag in range(1, n - 1):
        peak = max(peak, d[lag])
        if not climbed:
            climbed = d[lag + 1] < d[lag] and d[lag] > d[lag - 1]
            continue
        if d[lag] <= d[lag - 1] and d[lag] <= d[lag + 1] and d[lag] <= tol and peak >= sharpness * max(d[lag], tol):
            a, b, c = d[lag - 1], d[lag], d[lag + 1]
            curv = a - 2 * b + c
            off = 0.5 * (a - c) / curv if curv > 0 else 0.0
            return lag + float(np.clip(off, -0.5, 0.5)), float(b)
    return None, float(np.nanmin(d[1:])) if n > 1 else np.nan


def classify_omega(u: Field, eqs: Sequence = (), cfg: Optional[ClassifyConfig] = None) -> LimitSetReport:
    """Classify the omega-limit behaviour of ``u`` from the tail of its window.

    The terminal slice is compared with every equilibrium first; a match
    within ``eq_tol`` gives an equilibria chain, reporting the first slice too
    when it matches.  Otherwise the tail's recurrence profile is searched for
    a sharp minimum, which gives the s-period.
    """
    cfg = cfg or ClassifyConfig()
    g = u.grid
    v = u.values
    n_tail = max(3, int(np.ceil(cfg.tail_fraction * g.n_s)))
    n_tail = min(n_tail, g.n_s)
    tail = v[g.n_s - n_tail:]
    ends = {"alpha": v[0], "omega": v[-1]}
    dists = {end: [_sup_dist(loop, _eq_loop_values(e, g.time)) for e in eqs] for end, loop in ends.items()}
    evidence = {
        "tail_slices": n_tail,
        "tail_window": [float(g.s_nodes[g.n_s - n_tail]), g.s_max],
        "end_distances": dists,
        "tail_variation": _sup_dist(tail, tail[-1][None]),
    }

    if eqs:
        j = int(np.argmin(dists["omega"]))
        if dists["omega"][j] <= cfg.eq_tol:
            matches = {}
            for end in ("alpha", "omega"):
                k = int(np.argmin(dists[end]))
                if dists[end][k] <= cfg.eq_tol:
                    m = matches.setdefault(k, {"equilibrium": k, "u0": eqs[k].u0.tolist(), "ends": [], "distance": {}})
                    m["ends"].append(end)
                    m["distance"][end] = dists[end][k]
            return LimitSetReport(CHAIN, matches=list(matches.values()), evidence=evidence)

    d = recurrence_profile(tail)
    lag, best = _find_period(d, cfg.recurrence_tol, cfg.sharpness)
    evidence["recurrence_min"] = best
    if lag is not None:
        evidence["recurrence_lag"] = lag
        evidence["recurrence_score"] = float(d[int(round(lag))])
        n_rep = int(round(lag)) + 1
        start = g.n_s - n_tail
        rep = Field(CylinderGrid(float(g.s_nodes[start]), float(g.s_nodes[start + n_rep - 1]), n_rep, g.time),
                    v[start:start + n_rep].copy())
        return LimitSetReport(PERIODIC, period=lag * g.ds, representative=rep, evidence=evidence)

    if evidence["tail_variation"] <= cfg.recurrence_tol and not eqs:
        reason = "tail is stationary but no equilibrium list was supplied"
    elif evidence["tail_variation"] <= cfg.recurrence_tol:
        reason = "tail is stationary but matches no supplied equilibrium"
    else:
        reason = "no sharp recurrence within the tail and no equilibrium match"
    return LimitSetReport(UNDETERMINED, reason=reason, evidence=evidence)


def projection_injectivity(u: Field, report: LimitSetReport, t0: float = 0.0, n_samples: int = 64,
                           delta_inj: Optional[float] = None) -> ProjectionReport:
    """Project ``n_samples`` equispaced shifts across one period under evaluation at ``t0``.

    Pairs closer in orbit time than one s-step are not compared.  The default
    ``delta_inj`` is ``2 * ds * sup|u_s|`` over the representative window.
    """
    if report.verdict != PERIODIC:
        raise PreconditionError(f"projection report needs a periodic verdict, got {report.verdict}")
    if n_samples < 1:
        raise ValueError("n_samples must be positive")
    rep = report.representative
    period = report.period
    sigmas = rep.grid.s_min + period * np.arange(n_samples) / n_samples
    pts = np.array([project(u, s, t0) for s in sigmas])
    if delta_inj is None:
        slope = np.max(np.linalg.norm(ds_array(rep.values, rep.grid.ds), axis=-1))
        delta_inj = 2.0 * rep.grid.ds * float(slope)
    min_d = np.inf
    step = period / n_samples
    for i in range(n_samples):
        for j in range(i + 1, n_samples):
            sep = min(j - i, n_samples - (j - i)) * step
            if sep <= u.grid.ds:
                continue
            min_d = min(min_d, float(np.linalg.norm(pts[i] - pts[j])))
    return ProjectionReport(float(t0), pts, float(min_d), bool(min_d > delta_inj), float(delta_inj), sigmas)


def orbit_winding_values(u: Field, report: LimitSetReport, n_samples: int = 16) -> List[int]:
    """Winding numbers between distinct sampled shifts of a periodic orbit.

    For a genuine s-periodic orbit all of them coincide.
    """
    if report.verdict != PERIODIC:
        raise PreconditionError("orbit winding needs a periodic verdict")
    sig = report.representative.grid.s_min + report.period * np.arange(n_samples) / n_samples
    loops = [shift(u, s).values for s in sig]
    out = []
    for i in range(n_samples):
        for j in range(i + 1, n_samples):
            try:
                out.append(winding_number(loops[i] - loops[j]))
            except (AliasingError, ZeroProximityError):
                continue
    return out


def equilibrium_winding(u: Field, eq, delta_valid: Optional[float] = None):
    """W-trace of ``u`` against a constant-in-s equilibrium and the s beyond which it is constant.

    Returns ``(trace, s_bar)``; ``s_bar`` is None when no valid sample exists.
    """
    loop = _eq_loop_values(eq, u.grid.time)
    e_field = Field(u.grid, np.broadcast_to(loop, u.grid.shape).copy())
    tr = w_trace(u, e_field, delta_valid)
    valid = [x for x in tr.samples if x.valid]
    if not valid:
        return tr, None
    last = valid[-1].w_value
    s_bar = valid[0].s
    for x in valid:
        if x.w_value != last:
            s_bar = None
        elif s_bar is None:
            s_bar = x.s
    return tr, s_bar
