"""Closed-form fields used as oracles.

With ``z = t + i s`` every ``A * exp(2 pi i k z)`` solves ``u_s = J u_t``
(the CR equations with F = 0); in real form it is
``A e^{-2 pi k s} (cos 2 pi k t, sin 2 pi k t)``.
"""
from __future__ import annotations

import numpy as np

from .cylinder import CylinderGrid, Field, Loop

TWO_PI = 2.0 * np.pi


def holomorphic_mode(grid: CylinderGrid, k: int = 1, amplitude: complex = 1.0) -> Field:
    def func(S, T):
        z = amplitude * np.exp(-TWO_PI * k * S + 1j * TWO_PI * k * T)
        return z.real, z.imag

    return Field.from_function(grid, func)


def mode_loop(grid: CylinderGrid, s: float, k: int = 1, amplitude: complex = 1.0) -> Loop:
    z = amplitude * np.exp(-TWO_PI * k * s + 1j * TWO_PI * k * grid.time.nodes)
    return Loop(grid.time, np.stack([z.real, z.imag], axis=-1))


def crossing_pair(grid: CylinderGrid, level: float = 0.5):
    """Constant ``(level, 0)`` and the k = 1 mode; they meet once at ``s = -ln(level)/2pi, t = 0``."""
    return Field.constant(grid, (level, 0.0)), holomorphic_mode(grid, 1)


def two_mode_pair(grid: CylinderGrid, b: float = 0.5):
    """The k = 2 mode against ``b`` times the k = 1 mode.

    The difference winds twice for very negative s and once for very
    positive s; the drop happens where ``e^{-2 pi s} = b``.
    """
    return holomorphic_mode(grid, 2), holomorphic_mode(grid, 1, b)


def bump_field(grid: CylinderGrid, rng=None, n_modes: int = 0, margin: float = 0.15) -> Field:
    """Compactly supported test field ``eta(s) * g(t)``.

    ``eta`` is a C^2 bump vanishing on the outer ``margin`` fraction of the
    window at each end.  With ``n_modes = 0`` the loop factor is the unit
    circle; otherwise random band-limited coefficients from ``rng`` are used.
    """
    a = grid.s_min + margin * (grid.s_max - grid.s_min)
    b = grid.s_max - margin * (grid.s_max - grid.s_min)
    S, T = grid.mesh()
    x = np.clip((S - a) / (b - a), 0.0, 1.0)
    eta = (16.0 * x * x * (1 - x) * (1 - x)) ** 3
    if n_modes == 0:
        return Field(grid, np.stack([eta * np.cos(TWO_PI * T), eta * np.sin(TWO_PI * T)], axis=-1))
    rng = np.random.default_rng(rng)
    vals = np.zeros(grid.shape)
    for k in range(1, n_modes + 1):
        c = rng.normal(size=(2, 2)) / k
        vals[..., 0] += c[0, 0] * np.cos(TWO_PI * k * T) + c[0, 1] * np.sin(TWO_PI * k * T)
        vals[..., 1] += c[1, 0] * np.cos(TWO_PI * k * T) + c[1, 1] * np.sin(TWO_PI * k * T)
    # a slowly varying s-profile keeps the field genuinely two-dimensional
    vals *= (eta * (1.0 + 0.5 * np.sin(TWO_PI * x)))[..., None]
    return Field(grid, vals)
