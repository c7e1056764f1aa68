"""1-periodic orbits of ``u_t = F(t, u)`` by Newton shooting on the period map.

These are the s-independent solutions of the CR equations.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from .cylinder import Loop, TimeGrid, dt_array
from .errors import DivergenceError
from .vectorfield import VectorField


@dataclass
class Equilibrium:
    loop: Loop
    residual: float
    monodromy: np.ndarray
    floquet: np.ndarray
    trace_integral: float = 0.0

    @property
    def u0(self) -> np.ndarray:
        return self.loop.values[0]

    def liouville_defect(self) -> float:
        """Relative mismatch between ``det M`` and ``exp(int_0^1 tr DF dt)``."""
        expected = np.exp(self.trace_integral)
        return float(abs(np.linalg.det(self.monodromy) - expected) / abs(expected))

    def to_dict(self) -> dict:
        return {
            "u0": self.u0.tolist(),
            "residual": self.residual,
            "multipliers": [[m.real, m.imag] for m in self.floquet],
            "monodromy": self.monodromy.tolist(),
        }


class EquilibriumList(list):
    """List of equilibria carrying the per-seed outcome in ``seed_status``."""

    def __init__(self, items=(), seed_status=None):
        super().__init__(items)
        self.seed_status = list(seed_status or [])


def _rhs(spec, t, u, m):
    a = spec.df(t, u)
    return spec.f(t, u), a @ m, np.trace(a)


def _integrate(spec: VectorField, u0, n_steps: int, record_every: int = 0,
               escape_radius: float = 100.0):
    """RK4 for the state, the variational matrix and the trace integral over one period."""
    h = 1.0 / n_steps
    u = np.array(u0, dtype=float)
    m = np.eye(2)
    tr = 0.0
    samples = [u.copy()] if record_every else None
    for k in range(n_steps):
        t = k * h
        f1, m1, c1 = _rhs(spec, t, u, m)
        f2, m2, c2 = _rhs(spec, t + h / 2, u + h / 2 * f1, m + h / 2 * m1)
        f3, m3, c3 = _rhs(spec, t + h / 2, u + h / 2 * f2, m + h / 2 * m2)
        f4, m4, c4 = _rhs(spec, t + h, u + h * f3, m + h * m3)
        u = u + h / 6 * (f1 + 2 * f2 + 2 * f3 + f4)
        m = m + h / 6 * (m1 + 2 * m2 + 2 * m3 + m4)
        tr += h / 6 * (c1 + 2 * c2 + 2 * c3 + c4)
        if not np.all(np.isfinite(u)) or np.hypot(*u) > escape_radius:
            raise DivergenceError(f"trajectory left the ball of radius {escape_radius:g} at t = {t + h:.4f}")
        if record_every and (k + 1) % record_every == 0 and k + 1 < n_steps:
            samples.append(u.copy())
    return u, m, tr, samples


def integrate_period(spec: VectorField, u0, n_steps: int = 512, escape_radius: float = 100.0):
    """Flow ``u0`` over one period with classical RK4.

    Returns
    -------
    u1 : ndarray, shape (2,)
        State at t = 1.
    monodromy : ndarray, shape (2, 2)
        Solution of the variational equation ``M' = DF(t, u) M``, ``M(0) = I``.
    """
    if n_steps < 32:
        raise ValueError("n_steps must be at least 32")
    u1, m, _, _ = _integrate(spec, u0, n_steps, escape_radius=escape_radius)
    return u1, m


def floquet(monodromy) -> np.ndarray:
    """Eigenvalues of a 2x2 monodromy matrix from the closed-form quadratic."""
    m = np.asarray(monodromy, dtype=float)
    half_tr = 0.5 * (m[0, 0] + m[1, 1])
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    disc = np.sqrt(complex(half_tr * half_tr - det))
    return np.array([half_tr + disc, half_tr - disc])


def default_seeds(n: int = 8, radius: float = 2.0) -> np.ndarray:
    """``n x n`` lattice covering ``[-radius, radius]^2``."""
    g = np.linspace(-radius, radius, n)
    P, Q = np.meshgrid(g, g, indexing="ij")
    return np.stack([P.ravel(), Q.ravel()], axis=-1)


def make_equilibrium(spec: VectorField, u0, time: TimeGrid, n_steps: int = 512) -> Equilibrium:
    """Sample the orbit through ``u0`` on ``time`` and attach its diagnostics."""
    steps = max(n_steps, time.n_t)
    steps = time.n_t * int(np.ceil(steps / time.n_t))
    _, m, tr, samples = _integrate(spec, u0, steps, record_every=steps // time.n_t)
    loop = Loop(time, np.array(samples))
    resid = dt_array(loop.values, axis=0) - spec.f(time.nodes, loop.values)
    return Equilibrium(loop, float(np.max(np.linalg.norm(resid, axis=-1))), m, floquet(m), tr)


def find_equilibria(spec: VectorField, seeds: Optional[Sequence] = None, tol: float = 1e-10,
                    time: Optional[TimeGrid] = None, n_steps: int = 512, max_iter: int = 50,
                    escape_radius: float = 100.0) -> EquilibriumList:
    """Newton iteration on ``G(u0) = P(u0) - u0`` from every seed.

    Converged points are de-duplicated when their loops lie within ``10 * tol``
    in sup-distance.  Seeds that diverge, stall or hit a singular Newton matrix
    (``|det(M - I)| < 1e-12``) are recorded in ``seed_status`` and skipped.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    time = time or TimeGrid(64)
    seeds = default_seeds() if seeds is None else np.atleast_2d(np.asarray(seeds, dtype=float))
    found: List[Equilibrium] = []
    status = []
    for seed in seeds:
        u = seed.copy()
        outcome = "no-convergence"
        try:
            for _ in range(max_iter):
                u1, m = integrate_period(spec, u, n_steps, escape_radius)
                g = u1 - u
                if np.max(np.abs(g)) <= tol:
                    outcome = "converged"
                    break
                a = m - np.eye(2)
                if abs(np.linalg.det(a)) < 1e-12:
                    outcome = "degenerate-seed"
                    break
                u = u - np.linalg.solve(a, g)
        except DivergenceError:
            outcome = "diverged"
        status.append({"seed": seed.tolist(), "status": outcome, "u0": u.tolist()})
        if outcome != "converged":
            continue
        eq = make_equilibrium(spec, u, time, n_steps)
        if all(np.max(np.abs(eq.loop.values - e.loop.values)) > 10 * tol for e in found):
            found.append(eq)
    return EquilibriumList(found, status)
