"""Numerical laboratory for bounded solutions of nonlinear Cauchy-Riemann equations on R x S^1.

The equations ``u_s - J (u_t - F(t, u)) = 0`` are discretised spectrally in
the periodic variable t and by finite differences in the truncated variable
s.  On top of the solver sit the winding-number Lyapunov function for pairs
of solutions and a classifier for the limit behaviour under s-translation.
"""
from .cylinder import (J, CylinderGrid, Field, Loop, TimeGrid, apply_d, apply_dbar, apply_j,
                       cz_identity_ratio, d_t, fourier_interpolate)
from .equilibria import Equilibrium, find_equilibria, floquet, integrate_period
from .errors import (AliasingError, CRLabError, DegenerateInputError, DivergenceError,
                     GridMismatchError, OutOfWindowError, PreconditionError, ZeroProximityError)
from .limitset import (ClassifyConfig, LimitSetReport, ProjectionReport, classify_omega, project,
                       projection_injectivity, shift)
from .lyapunov import (CrossingEvent, WindingSample, WTrace, axioms_report, separation,
                       w_trace, winding_number, winding_quadrature)
from .solver import (FixedLoops, SolveReport, SolverConfig, SPeriodic, cr_linearized_apply,
                     cr_residual, hamilton_action, newton_solve)
from .vectorfield import (CustomPolynomial, Harmonic, HopfGradientPair, LinearRotation, Pendulum,
                          VectorField, Zero, check_jacobian, eval_df, eval_f, make_vectorfield)

__version__ = "0.1.0"

__all__ = [
    "J", "CylinderGrid", "Field", "Loop", "TimeGrid", "apply_d", "apply_dbar", "apply_j",
    "cz_identity_ratio", "d_t", "fourier_interpolate",
    "Equilibrium", "find_equilibria", "floquet", "integrate_period",
    "AliasingError", "CRLabError", "DegenerateInputError", "DivergenceError",
    "GridMismatchError", "OutOfWindowError", "PreconditionError", "ZeroProximityError",
    "ClassifyConfig", "LimitSetReport", "ProjectionReport", "classify_omega", "project",
    "projection_injectivity", "shift",
    "CrossingEvent", "WindingSample", "WTrace", "axioms_report", "separation",
    "w_trace", "winding_number", "winding_quadrature",
    "FixedLoops", "SolveReport", "SolverConfig", "SPeriodic", "cr_linearized_apply",
    "cr_residual", "hamilton_action", "newton_solve",
    "CustomPolynomial", "Harmonic", "HopfGradientPair", "LinearRotation", "Pendulum",
    "VectorField", "Zero", "check_jacobian", "eval_df", "eval_f", "make_vectorfield",
]
