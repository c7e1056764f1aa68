"""Grids, fields and differential operators on the truncated cylinder [s_min, s_max] x S^1.

Points of the plane are stored as trailing axes of length 2 holding ``(p, q)``.
A :class:`Field` keeps its values s-major with shape ``(n_s, n_t, 2)`` so each
s-slice is a contiguous loop.

The t-direction has period 1 and is differentiated spectrally; the s-direction
is truncated and differentiated with second-order finite differences.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Optional

import numpy as np

from .errors import DegenerateInputError, GridMismatchError

J = np.array([[0.0, -1.0], [1.0, 0.0]])


@dataclass(frozen=True)
class TimeGrid:
    """Equispaced nodes ``t_j = j / n_t`` on the circle R/Z."""

    n_t: int

    def __post_init__(self):
        if int(self.n_t) != self.n_t or self.n_t < 8 or self.n_t % 2:
            raise ValueError(f"n_t must be an even integer >= 8, got {self.n_t}")

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(self.n_t) / self.n_t

    @property
    def dt(self) -> float:
        return 1.0 / self.n_t


@dataclass(frozen=True)
class CylinderGrid:
    s_min: float
    s_max: float
    n_s: int
    time: TimeGrid

    def __post_init__(self):
        if not self.s_min < self.s_max:
            raise ValueError("s_min must be smaller than s_max")
        if int(self.n_s) != self.n_s or self.n_s < 3:
            raise ValueError(f"n_s must be an integer >= 3, got {self.n_s}")

    @classmethod
    def build(cls, s_min, s_max, n_s, n_t) -> "CylinderGrid":
        return cls(float(s_min), float(s_max), int(n_s), TimeGrid(int(n_t)))

    @property
    def n_t(self) -> int:
        return self.time.n_t

    @property
    def ds(self) -> float:
        return (self.s_max - self.s_min) / (self.n_s - 1)

    @property
    def s_nodes(self) -> np.ndarray:
        return np.linspace(self.s_min, self.s_max, self.n_s)

    @property
    def shape(self) -> tuple:
        return (self.n_s, self.n_t, 2)

    def mesh(self):
        """Return ``(S, T)`` arrays of shape ``(n_s, n_t)``."""
        return np.meshgrid(self.s_nodes, self.time.nodes, indexing="ij")


@dataclass
class Loop:
    """One s-slice ``t -> u(s, t)``; values have shape ``(n_t, 2)``."""

    time: TimeGrid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.time.n_t, 2):
            raise ValueError(
                f"loop values must have shape {(self.time.n_t, 2)}, got {self.values.shape}"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("loop values must be finite")

    @classmethod
    def constant(cls, time: TimeGrid, point) -> "Loop":
        return cls(time, np.tile(np.asarray(point, dtype=float), (time.n_t, 1)))

    def __call__(self, t) -> np.ndarray:
        """Trigonometric interpolation of the loop at arbitrary ``t``."""
        return fourier_interpolate(self.values, t)

    def __sub__(self, other: "Loop") -> "Loop":
        if other.time != self.time:
            raise GridMismatchError("loops live on different time grids")
        return Loop(self.time, self.values - other.values)


@dataclass
class Field:
    """A sampled map u(s, t) in R^2 on a :class:`CylinderGrid`.

    Parameters
    ----------
    grid : CylinderGrid
    values : array of shape ``(n_s, n_t, 2)``
    bound : float, optional
        If given, ``sup |u| <= bound`` is asserted on construction.
    """

    grid: CylinderGrid
    values: np.ndarray
    bound: Optional[float] = dc_field(default=None)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.shape:
            raise ValueError(
                f"field values must have shape {self.grid.shape}, got {self.values.shape}"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field values must be finite")
        if self.bound is not None and self.sup_norm() > self.bound:
            raise ValueError(f"sup|u| = {self.sup_norm():.6g} exceeds bound {self.bound}")

    @classmethod
    def from_function(cls, grid: CylinderGrid, func, bound=None) -> "Field":
        """Sample ``func(S, T) -> (P, Q)`` on the grid."""
        S, T = grid.mesh()
        p, q = func(S, T)
        values = np.stack(np.broadcast_arrays(p, q), axis=-1).astype(float)
        return cls(grid, values, bound)

    @classmethod
    def constant(cls, grid: CylinderGrid, point) -> "Field":
        return cls(grid, np.broadcast_to(np.asarray(point, dtype=float), grid.shape).copy())

    def slice(self, i: int) -> Loop:
        return Loop(self.grid.time, self.values[i].copy())

    def loops(self):
        return [self.slice(i) for i in range(self.grid.n_s)]

    def sup_norm(self) -> float:
        return float(np.max(np.linalg.norm(self.values, axis=-1)))

    def with_values(self, values) -> "Field":
        return Field(self.grid, values, self.bound)


def apply_j(x):
    """Rotate plane points by 90 degrees: ``(p, q) -> (-q, p)``.

    Works on any array whose last axis has length 2.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    out[..., 0] = -x[..., 1]
    out[..., 1] = x[..., 0]
    return out


def _wavenumbers(n_t: int) -> np.ndarray:
    k = np.fft.rfftfreq(n_t, d=1.0 / n_t)
    ik = 2j * np.pi * k
    # Nyquist mode is dropped so the derivative of a real loop stays real and odd-symmetric.
    ik[-1] = 0.0
    return ik


def dt_array(values, axis: int = -2) -> np.ndarray:
    """Spectral t-derivative of periodic samples along ``axis``."""
    values = np.asarray(values, dtype=float)
    n_t = values.shape[axis]
    coeffs = np.fft.rfft(values, axis=axis)
    shape = [1] * values.ndim
    shape[axis] = coeffs.shape[axis]
    coeffs *= _wavenumbers(n_t).reshape(shape)
    return np.fft.irfft(coeffs, n=n_t, axis=axis)


def d_t(loop: Loop) -> Loop:
    """Derivative of a 1-periodic loop via Fourier differentiation."""
    return Loop(loop.time, dt_array(loop.values, axis=0))


def ds_array(values, ds: float, axis: int = 0) -> np.ndarray:
    """Second-order s-derivative: central inside, one-sided at both ends."""
    v = np.moveaxis(np.asarray(values, dtype=float), axis, 0)
    out = np.empty_like(v)
    out[1:-1] = (v[2:] - v[:-2]) / (2.0 * ds)
    out[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * ds)
    out[-1] = (3.0 * v[-1] - 4.0 * v[-2] + v[-3]) / (2.0 * ds)
    return np.moveaxis(out, 0, axis)


def apply_dbar(u: Field) -> Field:
    """Return ``u_s + J u_t``."""
    us = ds_array(u.values, u.grid.ds)
    ut = dt_array(u.values, axis=1)
    return Field(u.grid, us + apply_j(ut))


def apply_d(u: Field) -> Field:
    """Return ``u_s - J u_t``."""
    us = ds_array(u.values, u.grid.ds)
    ut = dt_array(u.values, axis=1)
    return Field(u.grid, us - apply_j(ut))


def fourier_interpolate(values, t) -> np.ndarray:
    """Evaluate the trigonometric interpolant of periodic samples at ``t``.

    ``values`` has shape ``(n_t, ...)``; the result has shape ``np.shape(t) + values.shape[1:]``.
    """
    values = np.asarray(values, dtype=float)
    n = values.shape[0]
    c = np.fft.rfft(values, axis=0) / n
    t = np.asarray(t, dtype=float)
    k = np.arange(c.shape[0])
    phase = np.exp(2j * np.pi * np.multiply.outer(t, k))
    weights = np.full(c.shape[0], 2.0)
    weights[0] = 1.0
    weights[-1] = 1.0  # n is even; the Nyquist coefficient is real, leaving a cosine
    coef = c * weights.reshape((-1,) + (1,) * (values.ndim - 1))
    return np.tensordot(phase, coef, axes=([-1], [0])).real


def trapezoid_weights_s(grid: CylinderGrid) -> np.ndarray:
    w = np.full(grid.n_s, grid.ds)
    w[0] = w[-1] = 0.5 * grid.ds
    return w


def l2_norm(values, grid: CylinderGrid) -> float:
    """L^2 norm over the cylinder window: trapezoid in s, rectangle rule in t."""
    dens = np.sum(np.asarray(values) ** 2, axis=tuple(range(2, np.ndim(values))))
    return float(np.sqrt(np.sum(trapezoid_weights_s(grid) * dens.sum(axis=1)) * grid.time.dt))


def cz_identity_ratio(g: Field) -> float:
    """Ratio ``||grad g||_2 / ||dbar g||_2`` for a field supported away from the s-ends.

    For compactly supported fields the cross term in ``|g_s + J g_t|^2`` integrates
    to zero, so the ratio equals one.
    """
    gs = ds_array(g.values, g.grid.ds)
    gt = dt_array(g.values, axis=1)
    grad = np.concatenate([gs, gt], axis=-1)
    dbar = gs + apply_j(gt)
    den = l2_norm(dbar, g.grid)
    if den < 1e-14:
        raise DegenerateInputError(f"||dbar g|| = {den:.3g} is below 1e-14")
    return l2_norm(grad, g.grid) / den
