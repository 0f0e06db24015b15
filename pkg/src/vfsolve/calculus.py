"""Dual objects of the level-constrained problem.

The reduced dual objective is

    D(u) = <b, u> - rho^*(u) - sigma(A^T u | lev(phi, tau)),

and the level-constraint multiplier is recovered from a dual point as the
minimizer of tau*mu + (phi^*)^pi(A^T u, mu) over mu >= 0.  Only the closed
forms of the catalog kinds are used here; the perspective function is
never built as a general object (``oracle.mu_grid_oracle`` evaluates it
for cross-checks).
"""
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .errors import NoConjugateError, UnsupportedKindError
from .operators import apply_adjoint
from .penalties import misfit_conjugate
from .problem import ProblemSpec
from .regularizers import KINDS, Regularizer, multiplier_from_dual, support_level_set

CONE_BRANCH = "cone-branch"
ACTIVE_BRANCH = "active-branch"


@dataclass(frozen=True)
class DualPoint:
    u: np.ndarray
    mu: float
    value: float


def reduced_dual_value(problem: ProblemSpec, u, tau: float) -> float:
    rho = problem.misfit
    if not rho.convex:
        raise NoConjugateError("reduced dual needs a convex misfit")
    u = np.asarray(u, dtype=np.float64)
    conj = misfit_conjugate(rho, u)
    if not np.isfinite(conj):
        return -np.inf
    s = apply_adjoint(problem.A, u)
    return float(problem.b @ u) - conj - support_level_set(problem.regularizer, s, tau)


def dual_point(problem: ProblemSpec, u, tau: float) -> DualPoint:
    s = apply_adjoint(problem.A, u)
    mu, _ = recover_mu(problem.regularizer, s, tau)
    return DualPoint(np.asarray(u, dtype=np.float64), mu, reduced_dual_value(problem, u, tau))


def recover_mu(phi: Regularizer, s, tau: float, atol: float = 0.0):
    """Level-constraint multiplier and the branch it falls in.

    Returns ``(mu, status)``; ``status`` is ``"cone-branch"`` when mu = 0
    (s lies in the normal cone of dom phi, the extended-multiplier case)
    and ``"active-branch"`` when mu > 0 (s is mu times a subgradient).
    """
    if phi.kind not in KINDS:
        raise UnsupportedKindError(phi.kind)
    mu = multiplier_from_dual(phi, s, tau)
    if mu <= atol:
        return 0.0, CONE_BRANCH
    return mu, ACTIVE_BRANCH


# Horizon cones {d : rho^oo(d) <= 0}: "zero" means {0}, "all" means the whole space.
_MISFIT_HORIZON = {
    "least-squares": "zero",
    "two-norm": "zero",
    "huber": "zero",
    "vapnik": "zero",
    "student-t": "all",  # log growth is sublinear, so rho^oo == 0
}


def _affine_qs_horizon_trivial(phi):
    """True when {x : Hx + c direction lies in (cone U)°} is {0}."""
    H = phi.H
    # (cone U)° for a box U containing 0: y_i <= 0 where only upper > 0,
    # y_i >= 0 where only lower < 0, y_i = 0 where both, free where neither.
    lo_neg, up_pos = phi.lower < 0, phi.upper > 0
    A_ub, A_eq = [], []
    for i in range(H.shape[0]):
        if lo_neg[i] and up_pos[i]:
            A_eq.append(H[i])
        elif up_pos[i]:
            A_ub.append(H[i])
        elif lo_neg[i]:
            A_ub.append(-H[i])
    n = H.shape[1]
    kw = {}
    if A_ub:
        kw.update(A_ub=np.array(A_ub), b_ub=np.zeros(len(A_ub)))
    if A_eq:
        kw.update(A_eq=np.array(A_eq), b_eq=np.zeros(len(A_eq)))
    for j in range(n):
        for sign in (1.0, -1.0):
            cost = np.zeros(n)
            cost[j] = -sign
            res = linprog(cost, bounds=[(-1, 1)] * n, method="highs", **kw)
            if res.status == 0 and -res.fun > 1e-12:
                return False
    return True


def coercivity_check(problem: ProblemSpec, tau: float) -> dict:
    """Primal and reduced-dual coercivity flags from tabulated horizon cones."""
    phi = problem.regularizer
    if phi.kind == "affine-qs":
        phi_trivial = _affine_qs_horizon_trivial(phi)
    else:
        # bounded level sets: gauges of bounded balls, QS with 0 in int U
        phi_trivial = True
    rho_hzn = _MISFIT_HORIZON[problem.misfit.kind]
    if phi_trivial:
        primal = True
    else:
        # a nonzero horizon direction d of phi fails coercivity iff -Ad is a
        # horizon direction of rho; for rho_hzn == "zero" that needs Ad = 0
        primal = rho_hzn == "zero" and np.linalg.matrix_rank(problem.A.to_dense()) == problem.n
    # every catalog misfit is finite-valued, so dom rho + A lev = R^m
    dual = True
    return {"primal": bool(primal), "dual": dual}
