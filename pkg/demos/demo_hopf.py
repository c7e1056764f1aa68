"""A periodic-in-s solution for the Hopf gradient pair.

Solve on one period with s-periodic boundary conditions, classify the
omega-limit and check that the projection of the orbit to a fixed t0 is an
embedded circle.
"""
import numpy as np

from crlab.cylinder import CylinderGrid
from crlab.equilibria import find_equilibria
from crlab.limitset import classify_omega, orbit_winding_values, projection_injectivity
from crlab.solver import SPeriodic, circular_initial, newton_solve
from crlab.vectorfield import HopfGradientPair

vf = HopfGradientPair(1.0, 1.0)
grid = CylinderGrid.build(0.0, 2 * np.pi, 201, 16)
rep = newton_solve(vf, circular_initial(grid, 0.8), SPeriodic(2 * np.pi))
print(f"converged={rep.converged} in {rep.newton_iterations} steps, residual {rep.residual_sup:.1e}")
print(f"sup ||u| - 1| = {np.abs(np.linalg.norm(rep.field.values, axis=-1) - 1).max():.1e}")

cls = classify_omega(rep.field, find_equilibria(vf, [[0.0, 0.0]]))
print(f"verdict: {cls.verdict}, period {cls.period:.5f}")

pr = projection_injectivity(rep.field, cls, t0=0.0, n_samples=64)
print(f"projection: min pairwise distance {pr.min_pairwise_distance:.5f} "
      f"(circle chord {2 * np.sin(np.pi / 64):.5f}), injective={pr.injective}")
print("winding values between orbit shifts:", sorted(set(orbit_winding_values(rep.field, cls))))
