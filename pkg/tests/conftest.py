import numpy as np
import pytest

from crlab.analytic import mode_loop
from crlab.cylinder import CylinderGrid, Loop, fourier_interpolate
from crlab.equilibria import find_equilibria
from crlab.solver import (FixedLoops, SolverConfig, SPeriodic, circular_initial, linear_initial,
                          newton_solve)
from crlab.vectorfield import HopfGradientPair, Pendulum, Zero


def solve_mode(n_s, s_min=0.0, s_max=1.0, n_t=64):
    g = CylinderGrid.build(s_min, s_max, n_s, n_t)
    left, right = mode_loop(g, s_min), mode_loop(g, s_max)
    return newton_solve(Zero(), linear_initial(g, left, right), FixedLoops(left, right))


@pytest.fixture(scope="session")
def hopf_solution():
    g = CylinderGrid.build(0.0, 2 * np.pi, 201, 16)
    return newton_solve(HopfGradientPair(1.0, 1.0), circular_initial(g, 0.8), SPeriodic(2 * np.pi))


@pytest.fixture(scope="session")
def hopf_equilibria():
    return find_equilibria(HopfGradientPair(1.0, 1.0), [[0.0, 0.0]])


@pytest.fixture(scope="session")
def pendulum_equilibria():
    return find_equilibria(Pendulum(), [[0.03, -0.02], [0.47, 0.04]])


@pytest.fixture(scope="session")
def pendulum_solution(pendulum_equilibria):
    g = CylinderGrid.build(-20.0, 20.0, 401, 16)
    left, right = (Loop(g.time, fourier_interpolate(e.loop.values, g.time.nodes)) for e in pendulum_equilibria)
    return newton_solve(Pendulum(), linear_initial(g, left, right), FixedLoops(left, right),
                        SolverConfig(tol=1e-9))
