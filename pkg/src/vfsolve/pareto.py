"""Residual-constrained solves by root-finding on v(b, tau) = sigma.

Newton steps use the derivative -mu from the dual certificate of each
subproblem.  A bracket [lo, hi] with v(lo) >= sigma >= v(hi) is kept and
any step leaving it is replaced by bisection, which protects nonconvex
misfits where v need not be convex.
"""
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from scipy.optimize import minimize

from .errors import SigmaUnreachableError, SolverError
from .penalties import misfit_gradient, misfit_value
from .problem import ProblemSpec
from .regularizers import reg_value
from .value_fn import evaluate

CONVERGED = "converged"
BRACKET_EXHAUSTED = "bracket-exhausted"
MAX_ITER = "max-iter"


@dataclass
class ParetoOptions:
    tau0: float = 0.0
    rtol: float = 1e-10
    max_iter: int = 60
    theta: float = 0.1
    tol_min: float = 1e-11
    tol_max: float = 1e-4
    spg_max_iter: int = 20000


@dataclass
class TraceRow:
    k: int
    tau: float
    v: float
    dv: float
    tol: float
    inner_iters: int


@dataclass
class ParetoTrace:
    rows: List[TraceRow] = field(default_factory=list)
    tau: float = np.nan
    status: str = MAX_ITER

    @property
    def iterations(self) -> int:
        return len(self.rows)

    @property
    def inner_iterations(self) -> int:
        return sum(r.inner_iters for r in self.rows)

    def taus(self):
        return np.array([r.tau for r in self.rows])


def newton_step(tau: float, v: float, dv: float, sigma: float, lo: float = -np.inf,
                hi: float = np.inf) -> float:
    """tau + (sigma - v)/dv, replaced by the bracket midpoint when it leaves (lo, hi)."""
    if not dv < 0:
        raise ValueError("newton_step needs a negative derivative")
    if v == sigma:
        return tau
    t = tau + (sigma - v) / dv
    if lo < t < hi:
        return t
    if np.isfinite(lo) and np.isfinite(hi):
        return 0.5 * (lo + hi)
    return min(max(t, lo), hi)


def solve_constrained(problem: ProblemSpec, sigma: float, opts: Optional[ParetoOptions] = None):
    """Find tau with v(b, tau) = sigma and return (x, trace).

    x solves  min phi(x)  s.t.  rho(b - Ax) <= sigma  whenever the level
    constraint is active at the root.  Raises :class:`SigmaUnreachableError`
    when sigma is below inf_tau v.

    With a nonconvex misfit the computed v can jump across sigma (local
    solutions on either side of a budget differ).  The bracket then
    collapses without a root and the status is ``"bracket-exhausted"``;
    the returned x is the iterate at the upper bracket end, which
    satisfies rho(b - Ax) <= sigma.
    """
    from .spg import SpgOptions

    opts = opts or ParetoOptions()
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    trace = ParetoTrace()
    thresh = opts.rtol * max(1.0, sigma)
    lo, hi = 0.0, np.inf
    tau = max(opts.tau0, 0.0)
    x = x_hi = None
    tol = opts.tol_max
    for k in range(opts.max_iter):
        spg_opts = SpgOptions(tol=tol, max_iter=opts.spg_max_iter)
        sample = evaluate(problem, tau, tol, spg_opts, warm_start=x)
        x = sample.x
        dv = -sample.mu if np.isfinite(sample.mu) else -np.inf
        trace.rows.append(TraceRow(k, tau, sample.v, dv, tol, sample.iterations))
        gap = sample.v - sigma
        if tau == 0.0 and gap <= 0:
            trace.tau, trace.status = 0.0, CONVERGED
            return x, trace
        if abs(gap) <= thresh:
            trace.tau, trace.status = tau, CONVERGED
            return x, trace
        # v is an upper bound, so v < sigma is certain; v > sigma is trusted only
        # past the duality gap, or a loose solve could park lo beyond the root
        dgap = max(sample.gap, 0.0) if sample.gap is not None else 0.0
        if dgap <= 64 * np.finfo(float).eps * (1.0 + abs(sample.v)):
            dgap = 0.0  # rounding level
        if gap > 0:
            if sample.v - dgap > sigma:
                lo = max(lo, tau)
        elif tau < hi:
            hi, x_hi = tau, x
        if np.isfinite(hi) and hi - lo <= 4 * np.finfo(float).eps * max(1.0, hi):
            trace.tau, trace.status = hi, BRACKET_EXHAUSTED
            return x_hi, trace
        prev_tol = tol
        tol = min(opts.tol_max, max(opts.tol_min, opts.theta * abs(gap)))
        eta = min(0.5, gap / max(1.0, sigma))
        if gap > 0 and dgap > eta * gap and prev_tol > opts.tol_min:
            # the gap is first order in the inner error while v is second order;
            # refine at the same budget until the lower bound pins the step
            sharper = max(opts.tol_min, min(tol, 0.5 * prev_tol * eta * gap / dgap))
            if sample.pg_norm > sharper:
                tol = sharper
                continue
        if np.isfinite(dv) and dv < 0:
            # stepping from the dual lower bound keeps convex iterates left of the root
            v_step = sample.v - dgap if sample.v - dgap > sigma else sample.v
            tau = newton_step(tau, v_step, dv, sigma, lo, hi)
        elif not np.isfinite(dv):
            tau = 0.5 * (lo + hi) if np.isfinite(hi) else max(2 * tau, 1e-8 + tau)
        else:
            # flat spot above sigma
            if np.isfinite(hi):
                tau = 0.5 * (lo + hi)
            else:
                slack = tau - reg_value(problem.regularizer, x)
                if problem.misfit.convex and slack > 1e-8 * max(1.0, tau):
                    raise SigmaUnreachableError(
                        f"sigma={sigma} is below the minimum misfit {sample.v} (constraint inactive)")
                tau = 2 * tau + 1
    trace.tau, trace.status = tau, MAX_ITER
    return x, trace


@dataclass
class InverseReport:
    tau: float
    sigma: float
    tau_back: float
    discrepancy: float
    x_distance: float
    applicable: bool
    method: str
    note: str = ""


def _direct_residual_constrained(problem: ProblemSpec, sigma: float):
    """min ||x||_1 s.t. rho(b - Ax) <= sigma via SLSQP on the split x = p - q, p, q >= 0."""
    phi = problem.regularizer
    n = problem.n
    A = problem.A.to_dense()
    nonneg = phi.kind == "nonneg-one-norm"
    nv = n if nonneg else 2 * n

    def unpack(z):
        return z if nonneg else z[:n] - z[n:]

    def con(z):
        return sigma - misfit_value(problem.misfit, problem.b - A @ unpack(z))

    def con_jac(z):
        g = A.T @ misfit_gradient(problem.misfit, problem.b - A @ unpack(z), nonsmooth="zero")
        return g if nonneg else np.concatenate([g, -g])

    z0 = np.zeros(nv)
    res = minimize(
        lambda z: z.sum(), z0, jac=lambda z: np.ones(nv), method="SLSQP",
        bounds=[(0, None)] * nv,
        constraints=[{"type": "ineq", "fun": con, "jac": con_jac}],
        options={"maxiter": 2000, "ftol": 1e-15},
    )
    x = unpack(res.x)
    if not res.success and res.status != 8:
        raise SolverError(f"direct residual-constrained solve failed: {res.message}")
    return x


def verify_inverse(problem: ProblemSpec, tau: float, tol: float = 1e-11, method: str = "auto",
                   mu_tol: float = 1e-8) -> InverseReport:
    """Check v2(v1(tau)) = tau and the agreement of the two solutions.

    v1(tau) is the level-constrained value; v2(sigma) is the optimal
    regularizer value of the residual-constrained problem.  ``method``
    selects how v2 is computed: ``"direct"`` solves the residual-constrained
    problem with SLSQP (one-norm kinds, small n), ``"root"`` uses
    :func:`solve_constrained`; ``"auto"`` picks direct when available.

    When the constraint is not strictly active at tau (phi(x) < tau or a
    zero multiplier) the report is marked not applicable.
    """
    s1 = evaluate(problem, tau, tol)
    phi_x = reg_value(problem.regularizer, s1.x)
    sigma = s1.v
    active = phi_x >= tau - 1e-7 * max(1.0, tau) and np.isfinite(s1.mu) and s1.mu > mu_tol
    if not active:
        return InverseReport(tau, sigma, np.nan, np.nan, np.nan, False, "none",
                             note="level constraint not strictly active")
    if method == "auto":
        method = "direct" if (problem.regularizer.kind in ("one-norm", "nonneg-one-norm")
                              and not problem.regularizer.nonneg and problem.n <= 80) else "root"
    if method == "direct":
        x2 = _direct_residual_constrained(problem, sigma)
    elif method == "root":
        x2, _ = solve_constrained(problem, sigma, ParetoOptions(rtol=1e-12))
    else:
        raise ValueError(f"unknown method {method!r}")
    tau_back = reg_value(problem.regularizer, x2)
    return InverseReport(tau, sigma, tau_back, abs(tau_back - tau),
                         float(np.linalg.norm(x2 - s1.x)), True, method)
