"""Condition numbers of smooth convex functions relative to a polytope.

Facial distances of atom sets, relative smoothness and strong convexity
constants, and Frank-Wolfe / projected gradient solvers with rate checks.
"""
__version__ = "0.1.0"

from .conditioning import (ConditionReport, estimate_mu_star, estimate_relative_constants,
                           general_relative_bounds, mu_star_lower_bound_quadratic,
                           quadratic_relative_constants)
from .errors import (InputError, NoDataError, NumericalError, PolycondError)
from .geometry import (AtomMatrix, LiftedAtoms, diameter, enumerate_proper_faces,
                       facial_distance, local_facial_distance, polytope_pair_distance)
from .linalg import matrix_sqrt_psd, sym_eigen
from .lp import LinearProgram, fiber_distance, project_simplex, solve_lp
from .objectives import QuadraticObjective, half_sq_norm, logsumexp_objective
from .problem import ProblemSpec, builtin_problem, load_problem
from .solvers import SolveConfig, minimize_quadratic, solve, verify_linear_rate
