"""Value functions of level-constrained inverse problems, their derivatives, and
residual-constrained solves by root-finding on the Pareto curve."""
from .calculus import coercivity_check, dual_point, recover_mu, reduced_dual_value
from .errors import (ConfigError, DimensionError, NoConjugateError, NonsmoothPointError,
                     NotDifferentiableError, SigmaUnreachableError, SolverError,
                     UnsupportedKindError, VfsolveError)
from .operators import LinearOperator, apply, apply_adjoint, gaussian_ensemble
from .pareto import ParetoOptions, newton_step, solve_constrained, verify_inverse
from .penalties import Misfit, huber, least_squares, misfit_value, parse_misfit, student_t
from .problem import ProblemSpec, figure1_problem, figure1_value
from .regularizers import (Regularizer, huber_qs, nonneg_one_norm, one_norm, parse_regularizer,
                           project_level_set, reg_value, support_level_set, two_norm,
                           vapnik_affine_qs)
from .spg import SpgOptions, solve_subproblem
from .value_fn import ValueSample, b_subgradient, evaluate, sweep, tau_derivative

__version__ = "0.1.0"
