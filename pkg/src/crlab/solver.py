"""Newton-Krylov solver for the nonlinear Cauchy-Riemann equations on a truncated cylinder.

The residual of ``u_s - J (u_t - F(t, u)) = 0`` is discretised with spectral
t-derivatives and second-order central differences in s.  Two boundary
conditions are supported:

* :class:`FixedLoops` clamps the first and last s-slices to prescribed loops;
* :class:`SPeriodic` looks for a solution periodic in s with unknown period,
  closed by a phase anchor ``q(s_min, t0) = 0``.

Each Newton step is solved with restarted GMRES.  The preconditioner freezes
the coefficient ``J DF(t, u)`` at its t-average on every s-line; the frozen
operator then decouples over t-Fourier modes into banded systems in s that
are factorised exactly.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Union

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator, gmres, splu

from .cylinder import CylinderGrid, Field, Loop, apply_j, ds_array, dt_array, _wavenumbers, J
from .errors import GridMismatchError, PreconditionError
from .vectorfield import VectorField

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class FixedLoops:
    left: Loop
    right: Loop


@dataclass(frozen=True)
class SPeriodic:
    period_guess: float

    def __post_init__(self):
        if not self.period_guess > 0:
            raise ValueError("period_guess must be positive")


BoundaryCondition = Union[FixedLoops, SPeriodic]


@dataclass
class SolverConfig:
    """Tolerances and limits for :func:`newton_solve`.

    ``bound`` is the a-priori sup bound C on solutions; iterates exceeding
    ``10 * bound`` abort the solve.  ``repeats`` sets how many periods of an
    s-periodic solution are laid out in the returned field.
    """

    tol: float = 1e-9
    max_iter: int = 25
    damping_floor: float = 2.0**-10
    gmres_rtol: float = 1e-12
    gmres_restart: int = 30
    gmres_maxiter: int = 10
    bound: float = 1.0
    bc_slack: float = 1e-8
    singular_rcond: float = 1e-8
    t0: float = 0.0
    repeats: int = 8


@dataclass
class SolveReport:
    field: Field
    residual_sup: float
    newton_iterations: int
    converged: bool
    period: Optional[float] = None
    history: List[float] = field(default_factory=list)
    message: str = ""

    def to_dict(self) -> dict:
        return {
            "residual_sup": self.residual_sup,
            "newton_iterations": self.newton_iterations,
            "converged": self.converged,
            "period": self.period,
            "history": list(self.history),
            "message": self.message,
        }


def _sup(x) -> float:
    return float(np.max(np.linalg.norm(x, axis=-1))) if np.size(x) else 0.0


def cr_residual(spec: VectorField, u: Field) -> Field:
    """Nodewise ``u_s - J u_t + J F(t, u)`` with one-sided s-differences at the ends."""
    _, T = u.grid.mesh()
    us = ds_array(u.values, u.grid.ds)
    ut = dt_array(u.values, axis=1)
    return Field(u.grid, us - apply_j(ut) + apply_j(spec.f(T, u.values)))


def cr_linearized_apply(spec: VectorField, u: Field, v: Field) -> Field:
    """Frechet derivative of :func:`cr_residual` at ``u`` applied to ``v``."""
    if u.grid != v.grid:
        raise GridMismatchError("u and v must share a grid")
    _, T = u.grid.mesh()
    vs = ds_array(v.values, v.grid.ds)
    vt = dt_array(v.values, axis=1)
    dfv = np.einsum("...ij,...j->...i", spec.df(T, u.values), v.values)
    return Field(u.grid, vs - apply_j(vt) + apply_j(dfv))


def hamilton_action(spec, loop_values, t_nodes) -> np.ndarray:
    """Hamilton action ``-int_0^1 (<x, J x_t>/2 + H(t, x)) dt`` of loops.

    ``loop_values`` has shape ``(..., n_t, 2)``.  With this sign convention the
    action is non-increasing in s along solutions for Hamiltonian fields.
    """
    x = np.asarray(loop_values, dtype=float)
    xt = dt_array(x, axis=-2)
    sympl = np.sum(x * apply_j(xt), axis=-1)
    h = spec.hamiltonian(t_nodes, x)
    return -np.mean(0.5 * sympl + h, axis=-1)


def linear_initial(grid: CylinderGrid, left: Loop, right: Loop) -> Field:
    """Linear interpolation in s between two boundary loops."""
    lam = np.linspace(0.0, 1.0, grid.n_s)[:, None, None]
    return Field(grid, (1 - lam) * left.values[None] + lam * right.values[None])


def circular_initial(grid: CylinderGrid, radius: float, turns: float = 1.0) -> Field:
    """t-independent circle ``radius * (cos, sin)(2 pi turns (s - s_min)/(s_max - s_min))``."""
    def func(S, T):
        phase = 2 * np.pi * turns * (S - grid.s_min) / (grid.s_max - grid.s_min)
        return radius * np.cos(phase), radius * np.sin(phase)

    return Field.from_function(grid, func)


def _interp_weights(n_t: int, t0: float) -> np.ndarray:
    """Weights w with ``sum_j w_j x_j`` equal to the trigonometric interpolant at t0."""
    from .cylinder import fourier_interpolate

    return fourier_interpolate(np.eye(n_t), t0)


class _PinvFactor:
    """Minimum-norm solve for a singular mode block."""

    def __init__(self, mat, rcond):
        self.pinv = np.linalg.pinv(mat.toarray(), rcond=rcond)

    def solve(self, rhs):
        return self.pinv @ rhs


def _sigma_min_estimate(lu, size, dtype, n_iter=6):
    """Inverse iteration on ``B^H B`` using an existing LU factorisation."""
    x = np.random.default_rng(0).standard_normal(size).astype(dtype)
    x /= np.linalg.norm(x)
    growth = 0.0
    for _ in range(n_iter):
        y = lu.solve(lu.solve(x), trans="H")
        growth = np.linalg.norm(y)
        if not np.isfinite(growth) or growth == 0:
            return 0.0
        x = y / growth
    return 1.0 / np.sqrt(growth)


def _factor(mat, rcond):
    # Sources of (near-)singular mode blocks:
    #  * central differences with clamps at both ends leave the mean mode of a
    #    vanishing coefficient exactly singular when n_s is odd;
    #  * a connecting orbit clamped at both ends can be translated in s at
    #    almost no cost, and away from the solution the clamped first-order
    #    problem has exponentially small singular values.
    # A minimum-norm solve keeps the Newton step out of these directions.
    try:
        lu = splu(mat)
    except RuntimeError:
        return _PinvFactor(mat, rcond)
    norm = sp.linalg.norm(mat, 1)
    if _sigma_min_estimate(lu, mat.shape[0], mat.dtype) <= rcond * norm:
        return _PinvFactor(mat, rcond)
    return lu


class _Problem:
    """Flattened discrete Newton system for one boundary condition."""

    def __init__(self, spec: VectorField, grid: CylinderGrid, bc: BoundaryCondition, cfg: SolverConfig):
        self.spec = spec
        self.grid = grid
        self.bc = bc
        self.cfg = cfg
        self.n_t = grid.n_t
        self.t = grid.time.nodes
        self.periodic = isinstance(bc, SPeriodic)
        if self.periodic:
            self.n_rows = grid.n_s - 1
            self.dtau = 1.0 / self.n_rows
            self.anchor = _interp_weights(self.n_t, cfg.t0)
        else:
            self.n_rows = grid.n_s
            self.h = grid.ds
            if bc.left.time != grid.time or bc.right.time != grid.time:
                raise GridMismatchError("boundary loops must live on the grid's time grid")
        self.n_field = self.n_rows * self.n_t * 2
        self.size = self.n_field + (1 if self.periodic else 0)

    # -- packing --------------------------------------------------------------
    def pack(self, u, period=None):
        x = np.asarray(u, dtype=float).ravel()
        return np.append(x, period) if self.periodic else x.copy()

    def unpack(self, x):
        u = x[: self.n_field].reshape(self.n_rows, self.n_t, 2)
        return (u, x[-1]) if self.periodic else (u, None)

    # -- discrete operators ---------------------------------------------------
    def _ds(self, u, period):
        if self.periodic:
            return (np.roll(u, -1, axis=0) - np.roll(u, 1, axis=0)) / (2 * self.dtau * period)
        out = np.zeros_like(u)
        out[1:-1] = (u[2:] - u[:-2]) / (2 * self.h)
        return out

    def residual(self, x):
        u, period = self.unpack(x)
        r = self._ds(u, period) - apply_j(dt_array(u, axis=1)) + apply_j(self.spec.f(self.t[None, :], u))
        if self.periodic:
            g = self.anchor @ u[0, :, 1]
            return np.append(r.ravel(), g)
        r[0] = u[0] - self.bc.left.values
        r[-1] = u[-1] - self.bc.right.values
        return r.ravel()

    def residual_sup(self, x):
        res = self.residual(x)
        sup = _sup(res[: self.n_field].reshape(self.n_rows, self.n_t, 2))
        if self.periodic:
            sup = max(sup, abs(res[-1]))
        return sup

    def jacobian_operator(self, x):
        u, period = self.unpack(x)
        jdf = J @ self.spec.df(self.t[None, :], u)
        du_dtau = None
        if self.periodic:
            du_dtau = (np.roll(u, -1, axis=0) - np.roll(u, 1, axis=0)) / (2 * self.dtau)

        def matvec(y):
            y = np.ravel(y)
            v, dT = self.unpack(y)
            out = self._ds(v, period) - apply_j(dt_array(v, axis=1)) + np.einsum("...ij,...j->...i", jdf, v)
            if self.periodic:
                out = out - du_dtau * (dT / period**2)
                return np.append(out.ravel(), self.anchor @ v[0, :, 1])
            out[0] = v[0]
            out[-1] = v[-1]
            return out.ravel()

        return LinearOperator((self.size, self.size), matvec=matvec, dtype=float), jdf, du_dtau, period

    # -- preconditioner -------------------------------------------------------
    def preconditioner(self, jdf, du_dtau, period):
        n, n_t = self.n_rows, self.n_t
        a_mean = jdf.mean(axis=1)  # (n, 2, 2)
        ik = _wavenumbers(n_t)
        n_modes = ik.size
        if self.periodic:
            scale = 1.0 / (2 * self.dtau * period)
        else:
            scale = 1.0 / (2 * self.h)

        idx = np.arange(n)
        rows, cols = [], []
        # 2x2 diagonal blocks: placeholders filled per mode
        for a in range(2):
            for b in range(2):
                rows.append(2 * idx + a)
                cols.append(2 * idx + b)
        diag_rows = np.concatenate(rows)
        diag_cols = np.concatenate(cols)
        if self.periodic:
            nb_up = (idx + 1) % n
            nb_dn = (idx - 1) % n
            inner = idx
        else:
            inner = idx[1:-1]
            nb_up = inner + 1
            nb_dn = inner - 1
        off_rows = np.concatenate([2 * inner + c for c in range(2)] * 2)
        off_cols = np.concatenate([2 * nb_up + c for c in range(2)] + [2 * nb_dn + c for c in range(2)])
        off_vals = np.concatenate([np.full(inner.size, scale)] * 2 + [np.full(inner.size, -scale)] * 2)

        if self.periodic:
            b_hat = np.fft.rfft(-du_dtau / period**2, axis=1)  # (n, modes, 2)
        boundary = None if self.periodic else np.array([0, n - 1])

        factors = []
        for m in range(n_modes):
            blocks = a_mean.astype(complex) - ik[m] * J[None]
            if boundary is not None:
                blocks[boundary] = np.eye(2)
            dvals = np.concatenate([blocks[:, a, b] for a in range(2) for b in range(2)])
            r_all = np.concatenate([diag_rows, off_rows])
            c_all = np.concatenate([diag_cols, off_cols])
            v_all = np.concatenate([dvals, off_vals.astype(complex)])
            size = 2 * n
            if self.periodic and m == 0:
                # bordered by the period column and the t-averaged anchor row
                bcol = b_hat[:, 0, :].real.ravel()
                r_all = np.concatenate([r_all.real.astype(int), np.arange(size), [size]])
                c_all = np.concatenate([c_all, np.full(size, size), [1]])
                v_all = np.concatenate([v_all.real, bcol, [1.0 / n_t]])
                size += 1
                mat = sp.csc_matrix((v_all, (r_all, c_all)), shape=(size, size))
            elif m == 0 or m == n_modes - 1:
                mat = sp.csc_matrix((v_all.real, (r_all, c_all)), shape=(size, size))
            else:
                mat = sp.csc_matrix((v_all, (r_all, c_all)), shape=(size, size))
            factors.append(_factor(mat, self.cfg.singular_rcond))

        def apply(y):
            y = np.ravel(y)
            r, rT = self.unpack(y)
            rhat = np.fft.rfft(r, axis=1)
            xhat = np.empty_like(rhat)
            dT = 0.0
            if self.periodic:
                sol = factors[0].solve(np.append(rhat[:, 0, :].real.ravel(), rT))
                xhat[:, 0, :] = sol[:-1].reshape(n, 2)
                dT = sol[-1]
                start = 1
            else:
                start = 0
            for m in range(start, n_modes):
                rhs = rhat[:, m, :].ravel()
                if self.periodic:
                    rhs = rhs - b_hat[:, m, :].ravel() * dT
                if m == 0 or m == n_modes - 1:
                    xhat[:, m, :] = factors[m].solve(np.ascontiguousarray(rhs.real)).reshape(n, 2)
                else:
                    xhat[:, m, :] = factors[m].solve(rhs).reshape(n, 2)
            x = np.fft.irfft(xhat, n=n_t, axis=1)
            return self.pack(x, dT)

        return LinearOperator((self.size, self.size), matvec=apply, dtype=float)


def _solve_linear(problem: _Problem, x, rhs, cfg: SolverConfig):
    op, jdf, du_dtau, period = problem.jacobian_operator(x)
    prec = problem.preconditioner(jdf, du_dtau, period)
    counter = {"n": 0}

    def cb(_):
        counter["n"] += 1

    # Right preconditioning: solve (A M) z = rhs, step = M z.  Starting from
    # z = rhs makes the plain preconditioner step the GMRES initial iterate, so
    # Krylov iterations can only improve on it.
    amz = LinearOperator(op.shape, matvec=lambda z: op.matvec(prec.matvec(z)), dtype=float)
    nrhs = max(np.linalg.norm(rhs), 1e-300)
    rel0 = np.linalg.norm(amz.matvec(rhs) - rhs) / nrhs
    if rel0 <= cfg.gmres_rtol:
        return prec.matvec(rhs), 0, 0, rel0
    z, info = gmres(amz, rhs, x0=rhs.copy(), rtol=cfg.gmres_rtol, atol=0.0, restart=cfg.gmres_restart,
                    maxiter=cfg.gmres_maxiter, callback=cb, callback_type="pr_norm")
    step = prec.matvec(z)
    rel = np.linalg.norm(op.matvec(step) - rhs) / nrhs
    if rel > rel0:
        step, rel = prec.matvec(rhs), rel0
    return step, info, counter["n"], rel


def newton_solve(spec: VectorField, initial: Field, bc: BoundaryCondition,
                 cfg: Optional[SolverConfig] = None) -> SolveReport:
    """Damped Newton iteration for the discrete CR boundary-value problem.

    Parameters
    ----------
    spec : VectorField
    initial : Field
        Starting field.  For :class:`FixedLoops` its end slices must match the
        boundary loops within ``cfg.bc_slack``.  For :class:`SPeriodic` it
        covers one period guess with the last slice repeating the first.
    bc : FixedLoops or SPeriodic
    cfg : SolverConfig, optional

    Returns
    -------
    SolveReport
        ``converged`` is false when the iteration budget runs out, the linear
        solver stagnates or the blow-up guard trips; the best iterate is
        returned in every case.
    """
    cfg = cfg or SolverConfig()
    grid = initial.grid
    problem = _Problem(spec, grid, bc, cfg)

    if problem.periodic:
        x = problem.pack(initial.values[:-1], bc.period_guess)
    else:
        defect = max(_sup(initial.values[0] - bc.left.values), _sup(initial.values[-1] - bc.right.values))
        if defect > cfg.bc_slack:
            raise PreconditionError(f"initial field violates boundary loops by {defect:.3g}")
        x = problem.pack(initial.values)

    res = problem.residual_sup(x)
    history = [res]
    best_x, best_res = x, res
    message = ""
    it = 0
    while res > cfg.tol and it < cfg.max_iter:
        it += 1
        rhs = -problem.residual(x)
        step, info, n_lin, rel = _solve_linear(problem, x, rhs, cfg)
        log.debug("newton %d: residual %.3e, gmres info %d after %d its (rel %.1e)", it, res, info, n_lin, rel)
        if not np.all(np.isfinite(step)):
            message = "linear solver produced a non-finite step"
            break
        lam = 1.0
        while True:
            trial = x + lam * step
            trial_res = problem.residual_sup(trial)
            if trial_res < res:
                break
            if lam <= cfg.damping_floor:
                trial = None
                break
            lam *= 0.5
        if trial is None:
            message = (f"linear solver stagnated: no residual decrease down to damping "
                       f"{cfg.damping_floor:g} (GMRES relative residual {rel:.2e})")
            break
        x, res = trial, trial_res
        history.append(res)
        u, _ = problem.unpack(x)
        if not np.isfinite(res) or _sup(u) > 10 * cfg.bound:
            message = f"blow-up guard: sup|u| = {_sup(u):.3g} exceeds {10 * cfg.bound:g}"
            break
        if res < best_res:
            best_x, best_res = x, res

    converged = best_res <= cfg.tol
    if not converged and not message:
        message = f"no convergence in {cfg.max_iter} iterations"
    field_out, period = _assemble(problem, best_x, grid, cfg)
    return SolveReport(field_out, best_res, it, converged, period, history, message)


def _assemble(problem: _Problem, x, grid: CylinderGrid, cfg: SolverConfig):
    u, period = problem.unpack(x)
    if not problem.periodic:
        return Field(grid, u.copy()), None
    reps = max(int(cfg.repeats), 1)
    n = problem.n_rows
    tiled = np.concatenate([np.tile(u, (reps, 1, 1)), u[:1]], axis=0)
    out_grid = CylinderGrid(grid.s_min, grid.s_min + reps * period, reps * n + 1, grid.time)
    return Field(out_grid, tiled), float(period)


def constant_in_s(grid: CylinderGrid, loop: Loop) -> Field:
    """Field that repeats one loop on every s-slice (an s-independent solution candidate)."""
    return Field(grid, np.broadcast_to(loop.values, grid.shape).copy())
