import logging

import numpy as np
import pytest

from crlab.analytic import holomorphic_mode
from crlab.cylinder import CylinderGrid, Field, Loop, TimeGrid
from crlab.errors import GridMismatchError, PreconditionError
from crlab.solver import (FixedLoops, SolverConfig, SPeriodic, circular_initial, constant_in_s,
                          cr_linearized_apply, cr_residual, hamilton_action, linear_initial,
                          newton_solve)
from crlab.vectorfield import Harmonic, HopfGradientPair, LinearRotation, Pendulum, Zero

from conftest import solve_mode

log = logging.getLogger(__name__)


def test_residual_of_constant_is_zero():
    g = CylinderGrid.build(0, 1, 11, 16)
    assert np.abs(cr_residual(Zero(), Field.constant(g, (0.3, -0.2))).values).max() <= 1e-15


def test_residual_of_holomorphic_mode_is_second_order():
    errs = []
    for n in (101, 201):
        g = CylinderGrid.build(0, 1, n, 64)
        errs.append(np.abs(cr_residual(Zero(), holomorphic_mode(g)).values).max())
    assert 3.2 <= errs[0] / errs[1] <= 4.8


def test_residual_of_equilibrium_loop():
    g = CylinderGrid.build(0, 1, 7, 64)
    t = g.time.nodes
    loop = Loop(g.time, np.stack([np.cos(2 * np.pi * t), np.sin(2 * np.pi * t)], -1))
    assert np.abs(cr_residual(Harmonic(2 * np.pi), constant_in_s(g, loop)).values).max() <= 1e-10


def test_linearisation_of_linear_field_is_the_residual():
    rng = np.random.default_rng(2)
    g = CylinderGrid.build(0, 1, 9, 16)
    u = Field(g, rng.normal(size=g.shape))
    v = Field(g, rng.normal(size=g.shape))
    spec = LinearRotation(1.7)
    assert np.allclose(cr_linearized_apply(spec, u, v).values, cr_residual(spec, v).values, atol=1e-12)
    zero = Field.constant(g, (0, 0))
    assert np.abs(cr_linearized_apply(spec, u, zero).values).max() == 0.0


@pytest.mark.parametrize("spec", [HopfGradientPair(1.0, 1.0), Pendulum()])
def test_linearisation_directional_difference(spec):
    rng = np.random.default_rng(4)
    g = CylinderGrid.build(0, 1, 9, 16)
    u = Field(g, 0.5 * rng.normal(size=g.shape))
    v = Field(g, rng.normal(size=g.shape))
    h = 1e-6
    fd = (cr_residual(spec, Field(g, u.values + h * v.values)).values - cr_residual(spec, u).values) / h
    assert np.abs(fd - cr_linearized_apply(spec, u, v).values).max() <= 50 * h


def test_linearisation_grid_mismatch():
    a = Field.constant(CylinderGrid.build(0, 1, 5, 8), (0, 0))
    b = Field.constant(CylinderGrid.build(0, 1, 6, 8), (0, 0))
    with pytest.raises(GridMismatchError):
        cr_linearized_apply(Zero(), a, b)


def test_constant_loops_one_step():
    # even n_s: with F = 0 and odd n_s the odd s-nodes form an unclamped checkerboard mode
    g = CylinderGrid.build(0, 1, 20, 16)
    loop = Loop.constant(g.time, (0.3, -0.2))
    initial = linear_initial(g, loop, loop)
    initial.values[1:-1] += 0.1 * np.sin(np.pi * g.s_nodes[1:-1])[:, None, None]
    rep = newton_solve(Zero(), initial, FixedLoops(loop, loop))
    assert rep.converged and rep.newton_iterations == 1
    assert np.abs(rep.field.values - [0.3, -0.2]).max() <= 1e-12


def test_analytic_mode_second_order():
    errs = []
    for n in (201, 401):
        rep = solve_mode(n)
        exact = holomorphic_mode(rep.field.grid).values
        errs.append(np.abs(rep.field.values - exact).max())
        assert rep.converged
    assert errs[0] <= 1e-4
    assert 3.2 <= errs[0] / errs[1] <= 4.8


def test_boundary_defect_is_rejected():
    g = CylinderGrid.build(0, 1, 11, 16)
    a = Loop.constant(g.time, (0, 0))
    b = Loop.constant(g.time, (1, 0))
    with pytest.raises(PreconditionError):
        newton_solve(Zero(), Field.constant(g, (0, 0)), FixedLoops(a, b))


def test_speriodic_requires_positive_period():
    with pytest.raises(ValueError):
        SPeriodic(0.0)


def test_hopf_periodic(hopf_solution):
    rep = hopf_solution
    assert rep.converged and rep.residual_sup <= 1e-9
    radius = np.linalg.norm(rep.field.values, axis=-1)
    assert np.abs(radius - 1).max() <= 1e-3
    # Discrete oracle: on the circle, central differences turn by theta with
    # sin(theta) = omega * ds per step, so n * arcsin(T / n) = 2 pi for n = 200 steps.
    n = 200
    t = 2 * np.pi
    for _ in range(50):
        t = 2 * np.pi * (t / n) / np.arcsin(t / n)
    assert rep.period == pytest.approx(t, abs=1e-6)
    assert abs(rep.period - 2 * np.pi) <= 1e-2


def test_hopf_quadratic_tail():
    g = CylinderGrid.build(0, 2 * np.pi, 201, 16)
    rep = newton_solve(HopfGradientPair(1, 1), circular_initial(g, 0.8), SPeriodic(2 * np.pi),
                       SolverConfig(tol=1e-12))
    h = rep.history
    ks = [h[i + 1] / h[i] ** 2 for i in range(len(h) - 1) if h[i] < 1e-3 and h[i + 1] > 1e-13]
    log.info("quadratic tail constants K = %s", ks)
    assert ks and max(ks) <= 10.0


def test_blow_up_guard():
    g = CylinderGrid.build(0, 2 * np.pi, 101, 16)
    rep = newton_solve(HopfGradientPair(1, 1), circular_initial(g, 0.8), SPeriodic(2 * np.pi),
                       SolverConfig(bound=0.05))
    assert not rep.converged and "blow-up" in rep.message


def test_pendulum_heteroclinic(pendulum_solution, pendulum_equilibria):
    rep = pendulum_solution
    u = rep.field
    assert rep.converged and rep.residual_sup <= 1e-8
    assert np.abs(u.values[0] - pendulum_equilibria[0].loop.values[0]).max() <= 1e-3
    assert np.abs(u.values[-1] - pendulum_equilibria[1].loop.values[0]).max() <= 1e-3
    # t-independent solution of p' = sin(2 pi p)/(2 pi), q = 0: tan(pi p) = e^s
    s = u.grid.s_nodes
    assert np.abs(u.values[:, :, 0] - (np.arctan(np.exp(s)) / np.pi)[:, None]).max() <= 2e-4
    assert np.abs(u.values[:, :, 1]).max() <= 1e-8


def test_hamilton_action_non_increasing(pendulum_solution):
    u = pendulum_solution.field
    action = hamilton_action(Pendulum(), u.values, u.grid.time.nodes)
    assert np.diff(action).max() <= 1e-8
    assert action[0] - action[-1] > 0.01


def test_hamilton_action_of_constant_loop():
    t = TimeGrid(16).nodes
    assert hamilton_action(Pendulum(), np.tile([0.5, 0.0], (16, 1)), t) == pytest.approx(-2 / (4 * np.pi**2))


@pytest.mark.slow
def test_slice_determinism(pendulum_solution, pendulum_equilibria):
    g = pendulum_solution.field.grid
    left, right = Loop.constant(g.time, (0, 0)), Loop.constant(g.time, (0.5, 0))
    s = g.s_nodes
    logistic = 0.5 / (1 + np.exp(-s / 3))
    logistic = (logistic - logistic[0]) / (logistic[-1] - logistic[0]) * 0.5
    init = Field(g, np.stack([np.broadcast_to(logistic[:, None], (g.n_s, g.n_t)),
                              np.zeros((g.n_s, g.n_t))], -1))
    other = newton_solve(Pendulum(), init, FixedLoops(left, right), SolverConfig(tol=1e-9))
    assert other.converged
    i0 = int(np.argmin(np.abs(s)))
    a, b = pendulum_solution.field.values, other.field.values
    assert np.abs(a[i0] - b[i0]).max() <= 1e-10
    assert np.abs(a - b).max() <= 1e-6


def test_non_convergence_returns_best_iterate(pendulum_equilibria):
    g = CylinderGrid.build(-20, 20, 401, 16)
    left, right = Loop.constant(g.time, (0, 0)), Loop.constant(g.time, (0.5, 0))
    rep = newton_solve(Pendulum(), linear_initial(g, left, right), FixedLoops(left, right),
                       SolverConfig(max_iter=1))
    assert not rep.converged and rep.newton_iterations == 1
    assert rep.residual_sup == min(rep.history)


def test_report_to_dict(hopf_solution):
    d = hopf_solution.to_dict()
    assert d["converged"] and d["period"] == hopf_solution.period
