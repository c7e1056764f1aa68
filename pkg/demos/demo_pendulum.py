"""A heteroclinic solution for the pendulum Hamiltonian.

Locate the two constant equilibria, connect them with a solution on a long
window and confirm that the Hamilton action decreases along s while both
ends settle onto distinct equilibria.
"""
import numpy as np

from crlab.cylinder import CylinderGrid, Loop, fourier_interpolate
from crlab.equilibria import find_equilibria
from crlab.limitset import classify_omega
from crlab.solver import FixedLoops, SolverConfig, hamilton_action, linear_initial, newton_solve
from crlab.vectorfield import Pendulum

vf = Pendulum()
eqs = find_equilibria(vf, [[0.02, -0.03], [0.46, 0.05]])
for e in eqs:
    print(f"equilibrium u0 = {np.round(e.u0, 10).tolist()}, residual {e.residual:.1e}")

grid = CylinderGrid.build(-20.0, 20.0, 401, 16)
left, right = (Loop(grid.time, fourier_interpolate(e.loop.values, grid.time.nodes)) for e in eqs)
rep = newton_solve(vf, linear_initial(grid, left, right), FixedLoops(left, right), SolverConfig(tol=1e-9))
print(f"converged={rep.converged}, residual {rep.residual_sup:.1e}")

u = rep.field
action = hamilton_action(vf, u.values, u.grid.time.nodes)
print(f"action from {action[0]:.5f} to {action[-1]:.5f}, max increase {np.diff(action).max():.1e}")

p = u.values[:, 0, 0]
exact = np.arctan(np.exp(u.grid.s_nodes)) / np.pi
print(f"sup |p - arctan(e^s)/pi| = {np.abs(p - exact).max():.1e}")

cls = classify_omega(u, eqs)
print("verdict:", cls.verdict)
for m in cls.matches:
    print(f"  ends {m['ends']} -> equilibrium {m['equilibrium']}")
