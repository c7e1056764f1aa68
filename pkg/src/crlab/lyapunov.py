"""Winding-number Lyapunov function for pairs of solutions.

For two fields ``u1, u2`` the difference loop ``w(s, .) = u1(s, .) - u2(s, .)``
has an integer winding number about the origin whenever it does not vanish.
Along the s-direction this integer can only drop, and it drops exactly where
``w`` has a zero (a crossing).
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize_scalar

from .cylinder import Field, Loop, dt_array, fourier_interpolate
from .errors import AliasingError, GridMismatchError, ZeroProximityError

TWO_PI = 2.0 * np.pi

#: Relative accuracy of computed fields (ten times the default solver tolerance).
#: Difference loops smaller than this carry no reliable winding information.
ACCURACY_FLOOR = 1e-8


def _values(w) -> np.ndarray:
    return w.values if isinstance(w, Loop) else np.asarray(w, dtype=float)


def winding_number(w, delta_valid: float = 0.0) -> int:
    """Winding number of a sampled loop about the origin.

    Angle increments between adjacent nodes are taken on the principal branch
    and summed; the sum is an exact multiple of 2 pi up to rounding.

    Raises
    ------
    ZeroProximityError
        If some node satisfies ``|w(t_j)| <= delta_valid`` (or is exactly 0).
    AliasingError
        If an angular increment reaches pi, i.e. the loop is under-resolved.
    """
    v = _values(w)
    z = v[:, 0] + 1j * v[:, 1]
    r = np.abs(z)
    if r.min() <= delta_valid or r.min() == 0.0:
        raise ZeroProximityError(f"loop passes within {r.min():.3g} of the origin")
    inc = np.angle(np.roll(z, -1) / z)
    if np.max(np.abs(inc)) >= np.pi - 1e-12:
        raise AliasingError("angular increment reaches pi; refine the time grid")
    total = inc.sum() / TWO_PI
    k = int(np.rint(total))
    if abs(total - k) > 1e-6:
        raise AliasingError(f"accumulated angle {total:.8f} is not an integer")
    return k


def winding_quadrature(w) -> float:
    """``(1/2pi) * integral of w^* theta`` with theta = (p dq - q dp)/(p^2 + q^2).

    Spectral quadrature on the loop samples; an independent check of
    :func:`winding_number` for smooth, well-resolved loops.
    """
    v = _values(w)
    dv = dt_array(v, axis=0)
    p, q = v[:, 0], v[:, 1]
    integrand = (p * dv[:, 1] - q * dv[:, 0]) / (p * p + q * q)
    return float(np.mean(integrand) / TWO_PI)


def separation(u1, u2) -> float:
    """Minimum over nodes of ``|u1 - u2|``."""
    a, b = _values(u1), _values(u2)
    if a.shape != b.shape:
        raise GridMismatchError("loops must share a time grid")
    return float(np.min(np.linalg.norm(a - b, axis=-1)))


@dataclass
class WindingSample:
    s: float
    w_value: Optional[int]
    separation: float
    valid: bool


@dataclass
class CrossingEvent:
    s_star: float
    t_star: float
    bracket: Tuple[int, int]
    min_separation: float
    w_before: Optional[int] = None
    w_after: Optional[int] = None

    @property
    def post_drop(self) -> Optional[int]:
        if self.w_before is None or self.w_after is None:
            return None
        return self.w_before - self.w_after


@dataclass
class WTrace:
    """Per-slice winding samples with crossing events.

    ``delta_valid`` holds the validity radius used on each slice.
    """

    samples: List[WindingSample]
    crossings: List[CrossingEvent]
    delta_valid: np.ndarray

    @property
    def s(self) -> np.ndarray:
        return np.array([x.s for x in self.samples])

    @property
    def valid(self) -> np.ndarray:
        return np.array([x.valid for x in self.samples])

    def valid_values(self) -> np.ndarray:
        return np.array([x.w_value for x in self.samples if x.valid], dtype=int)

    def monotonicity_violations(self) -> int:
        """Number of increases between consecutive valid samples."""
        v = self.valid_values()
        return int(np.sum(np.diff(v) > 0)) if v.size > 1 else 0

    def rows(self):
        """``(s, W, separation, valid)`` rows for CSV export; W is empty when invalid."""
        return [(x.s, "" if x.w_value is None else x.w_value, x.separation, int(x.valid))
                for x in self.samples]


def default_delta_valid(w_values: np.ndarray) -> np.ndarray:
    """Per-slice validity radius: ten times the local grid resolution of a difference field.

    The resolution of slice i is the largest chord error of piecewise-linear
    reconstruction, ``max |second difference| / 8``, in s (from the
    neighbouring slices) and in t; below it a node-sampled separation cannot
    certify that the continuous loop avoids the origin.  Measuring it slice by
    slice keeps exponentially varying fields from inheriting the resolution
    of their largest slice.  The radius never drops below
    ``ACCURACY_FLOOR * max(1, sup |w|)``, the accuracy of solver output.
    """
    w = np.asarray(w_values, dtype=float)
    d2t = np.roll(w, -1, axis=1) - 2 * w + np.roll(w, 1, axis=1)
    res = np.max(np.linalg.norm(d2t, axis=-1), axis=-1) / 8
    if w.shape[0] >= 3:
        d2s = np.max(np.linalg.norm(w[2:] - 2 * w[1:-1] + w[:-2], axis=-1), axis=-1) / 8
        d2s = np.concatenate([d2s[:1], d2s, d2s[-1:]])
        res = np.maximum(res, d2s)
    scale = max(1.0, float(np.max(np.linalg.norm(w, axis=-1))))
    return np.maximum(10.0 * res, ACCURACY_FLOOR * scale)


def _slice_at(w: np.ndarray, s_nodes: np.ndarray, s: float) -> np.ndarray:
    i = int(np.clip(np.searchsorted(s_nodes, s) - 1, 0, len(s_nodes) - 2))
    lam = (s - s_nodes[i]) / (s_nodes[i + 1] - s_nodes[i])
    return (1 - lam) * w[i] + lam * w[i + 1]


def _loop_min(loop_values: np.ndarray, oversample: int = 8):
    """Minimum of ``|loop(t)|`` over the circle for the trigonometric interpolant."""
    n = loop_values.shape[0]
    tt = np.arange(n * oversample) / (n * oversample)
    dense = np.linalg.norm(fourier_interpolate(loop_values, tt), axis=-1)
    j = int(np.argmin(dense))
    h = 1.0 / (n * oversample)
    res = minimize_scalar(lambda t: np.linalg.norm(fourier_interpolate(loop_values, t)),
                          bounds=(tt[j] - h, tt[j] + h), method="bounded",
                          options={"xatol": 1e-12})
    if res.fun < dense[j]:
        return float(res.x % 1.0), float(res.fun)
    return float(tt[j]), float(dense[j])


def _refine_crossing(w, s_nodes, lo: int, hi: int):
    f = lambda s: _loop_min(_slice_at(w, s_nodes, s))[1]
    a, b = s_nodes[lo], s_nodes[hi]
    i_best = lo + int(np.argmin([f(s) for s in s_nodes[lo:hi + 1]]))
    a = s_nodes[max(i_best - 1, lo)]
    b = s_nodes[min(i_best + 1, hi)]
    res = minimize_scalar(f, bounds=(a, b), method="bounded", options={"xatol": 1e-10})
    s_star = float(res.x)
    t_star, sep = _loop_min(_slice_at(w, s_nodes, s_star))
    return s_star, t_star, sep


def w_trace(u1: Field, u2: Field, delta_valid=None) -> WTrace:
    """Winding number of ``u1 - u2`` on every s-slice, with crossing events.

    Slices whose separation is at most ``delta_valid`` are flagged invalid.
    A crossing is reported for each maximal run of invalid slices and for
    each pair of adjacent valid slices whose winding numbers differ.  Its
    location ``(s*, t*)`` is refined by minimising the interpolated separation
    inside the bracket.
    """
    if u1.grid != u2.grid:
        raise GridMismatchError("fields must share a grid")
    w = u1.values - u2.values
    s_nodes = u1.grid.s_nodes
    if delta_valid is None:
        delta = default_delta_valid(w)
    else:
        delta = np.broadcast_to(np.asarray(delta_valid, dtype=float), (len(s_nodes),)).copy()
    samples = []
    for i, s in enumerate(s_nodes):
        sep = float(np.min(np.linalg.norm(w[i], axis=-1)))
        value = None
        if sep > delta[i]:
            try:
                value = winding_number(w[i], delta[i])
            except (AliasingError, ZeroProximityError):
                value = None
        samples.append(WindingSample(float(s), value, sep, value is not None))

    brackets = []
    n = len(samples)
    i = 0
    while i < n:
        if not samples[i].valid:
            j = i
            while j + 1 < n and not samples[j + 1].valid:
                j += 1
            brackets.append((max(i - 1, 0), min(j + 1, n - 1)))
            i = j + 1
        else:
            if i + 1 < n and samples[i + 1].valid and samples[i + 1].w_value != samples[i].w_value:
                brackets.append((i, i + 1))
            i += 1

    crossings = []
    if not any(x.valid for x in samples):
        return WTrace(samples, crossings, delta)
    for lo, hi in brackets:
        s_star, t_star, sep = _refine_crossing(w, s_nodes, lo, hi)
        before = samples[lo].w_value if samples[lo].valid else None
        after = samples[hi].w_value if samples[hi].valid else None
        crossings.append(CrossingEvent(s_star, t_star, (lo, hi), sep, before, after))
    return WTrace(samples, crossings, delta)


def _pi_distance(u1: Field, u2: Field, t0: float) -> np.ndarray:
    a = fourier_interpolate(np.swapaxes(u1.values, 0, 1), t0)
    b = fourier_interpolate(np.swapaxes(u2.values, 0, 1), t0)
    return np.linalg.norm(a - b, axis=-1)


def axioms_report(fields: Sequence[Field], pairs: Optional[Sequence[Tuple[int, int]]] = None,
                  delta_valid=None, t0: float = 0.0) -> dict:
    """Check the observable consequences of the Lyapunov axioms on sampled pairs.

    Checks, per pair:

    ``A1``  W(a, b) == W(b, a) on every slice, and W is constant between crossings;
    ``A3``  slices where the projections at ``t0`` agree within ``delta_valid``
            are inside a crossing bracket;
    ``A4``  crossing brackets are isolated from each other;
    ``A5``  every crossing with valid flanks drops W by at least one;
    ``monotone``  valid W samples never increase in s.

    A pair without any valid sample lies on the diagonal and is reported as such.
    ``delta_valid`` may be a scalar, a per-slice array or None for the
    per-slice default of :func:`default_delta_valid`.
    """
    grids = {f.grid for f in fields}
    if len(grids) > 1:
        raise GridMismatchError("all fields must share one grid")
    if pairs is None:
        pairs = list(combinations(range(len(fields)), 2))
    out = {"pairs": [], "violations": [], "diagonal_pairs": []}
    for a, b in pairs:
        fa, fb = fields[a], fields[b]
        ab = w_trace(fa, fb, delta_valid)
        ba = w_trace(fb, fa, ab.delta_valid)
        rec = {"pair": [a, b], "delta_valid_max": float(np.max(ab.delta_valid)), "checks": {}, "crossings": []}
        if not ab.valid.any():
            out["diagonal_pairs"].append([a, b])
            rec["diagonal"] = True
            out["pairs"].append(rec)
            continue

        sym = all(x.w_value == y.w_value and x.valid == y.valid for x, y in zip(ab.samples, ba.samples))
        sym = sym and [c.bracket for c in ab.crossings] == [c.bracket for c in ba.crossings]
        in_bracket = np.zeros(len(ab.samples), dtype=bool)
        for c in ab.crossings:
            in_bracket[c.bracket[0]:c.bracket[1] + 1] = True
        const = True
        for i in range(len(ab.samples) - 1):
            x, y = ab.samples[i], ab.samples[i + 1]
            if x.valid and y.valid and x.w_value != y.w_value and not (in_bracket[i] and in_bracket[i + 1]):
                const = False
        rec["checks"]["A1"] = bool(sym and const)

        close = _pi_distance(fa, fb, t0) <= ab.delta_valid
        rec["checks"]["A3"] = bool(np.all(in_bracket[close] | ~ab.valid[close]))

        isolated = True
        for c1, c2 in zip(ab.crossings, ab.crossings[1:]):
            width = max(c1.bracket[1] - c1.bracket[0], c2.bracket[1] - c2.bracket[0])
            if c2.bracket[0] - c1.bracket[1] < 0 or (c2.bracket[0] - c1.bracket[0]) <= width and c2.bracket[0] < c1.bracket[1]:
                isolated = False
        rec["checks"]["A4"] = isolated

        drops = [c.post_drop for c in ab.crossings if c.post_drop is not None]
        rec["checks"]["A5"] = all(d >= 1 for d in drops)
        rec["checks"]["monotone"] = ab.monotonicity_violations() == 0
        rec["w_values"] = sorted(set(ab.valid_values().tolist()))
        rec["crossings"] = [
            {"s_star": c.s_star, "t_star": c.t_star, "bracket": list(c.bracket),
             "s_bracket": [ab.samples[c.bracket[0]].s, ab.samples[c.bracket[1]].s],
             "post_drop": c.post_drop, "min_separation": c.min_separation}
            for c in ab.crossings
        ]
        for name, ok in rec["checks"].items():
            if not ok:
                out["violations"].append({"pair": [a, b], "check": name})
        out["pairs"].append(rec)
    out["passed"] = not out["violations"] and not out["diagonal_pairs"]
    return out
