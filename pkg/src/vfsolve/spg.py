"""Spectral projected gradient for  min rho(b - Ax)  s.t.  phi(x) <= tau.

Barzilai-Borwein steps along the projected direction with the
Grippo-Lampariello-Lucidi nonmonotone line search (memory M).
"""
from collections import deque
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .calculus import recover_mu, reduced_dual_value
from .operators import apply, apply_adjoint
from .penalties import misfit_gradient, misfit_value
from .problem import ProblemSpec
from .regularizers import project_level_set, reg_value, support_level_set

CONVERGED = "converged"
MAX_ITER = "max-iter"
NONSMOOTH_STOP = "nonsmooth-stop"
STALLED = "stalled"

_EPS = np.finfo(float).eps


@dataclass
class SpgOptions:
    max_iter: int = 20000
    tol: float = 1e-10
    memory: int = 10
    step_min: float = 1e-10
    step_max: float = 1e10
    decrease: float = 1e-4
    max_backtracks: int = 60

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.memory < 1:
            raise ValueError("memory must be >= 1")
        if not 0 < self.step_min < self.step_max:
            raise ValueError("need 0 < step_min < step_max")


@dataclass
class SpgResult:
    x: np.ndarray
    r: np.ndarray
    f: float
    iterations: int
    status: str
    pg_norm: float
    log: Optional[List[tuple]] = field(default=None, repr=False)


@dataclass
class KktReport:
    u: Optional[np.ndarray]
    s: Optional[np.ndarray]
    mu: float
    branch: str
    feasibility: float
    complementarity: float
    stationarity: float
    gap: Optional[float]

    def max_residual(self) -> float:
        vals = [max(self.feasibility, 0.0), abs(self.complementarity), abs(self.stationarity)]
        if self.gap is not None:
            vals.append(abs(self.gap))
        return max(vals)


def _pg_norm(phi, x, g, tau):
    return float(np.linalg.norm(project_level_set(phi, x - g, tau) - x))


def solve_subproblem(problem: ProblemSpec, tau: float, opts: Optional[SpgOptions] = None,
                     warm_start=None, trace: bool = False) -> SpgResult:
    """Solve the level-constrained subproblem at budget ``tau``.

    ``warm_start`` is projected onto the level set before use.  With
    ``trace=True`` the result carries ``log`` rows (iter, f, pg_norm, step).
    """
    opts = opts or SpgOptions()
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    phi, rho = problem.regularizer, problem.misfit
    x0 = np.zeros(problem.n) if warm_start is None else np.asarray(warm_start, dtype=np.float64)
    x = project_level_set(phi, x0, tau)
    r = problem.b - apply(problem.A, x)
    f = misfit_value(rho, r)
    log = [] if trace else None

    def grad(res):
        return -apply_adjoint(problem.A, misfit_gradient(rho, res, nonsmooth="zero"))

    if rho.kind == "two-norm" and f == 0.0:
        return SpgResult(x, r, f, 0, NONSMOOTH_STOP, 0.0, log)
    g = grad(r)
    pg = _pg_norm(phi, x, g, tau)
    step = 1.0 / max(float(np.max(np.abs(project_level_set(phi, x - g, tau) - x), initial=0.0)), 1e-12)
    step = min(max(step, opts.step_min), opts.step_max)
    history = deque([f], maxlen=opts.memory)
    status = MAX_ITER
    it = 0
    for it in range(opts.max_iter + 1):
        if trace:
            log.append((it, f, pg, step))
        if pg <= opts.tol:
            status = CONVERGED
            break
        if it == opts.max_iter:
            break
        d = project_level_set(phi, x - step * g, tau) - x
        # for feasible x the projection gives g.d <= -|d|^2/step; a rounding-level
        # overshoot of the level set can flip the computed sign when |d| is tiny
        gtd = min(float(g @ d), -float(d @ d) / step)
        if gtd >= 0:
            # d vanished in rounding; restart with a tiny step
            if step <= opts.step_min:
                status = STALLED
                break
            step = opts.step_min
            continue
        f_ref = max(history)
        slack = 10 * _EPS * abs(f_ref)
        lam = 1.0
        Ad = apply(problem.A, d)
        for _ in range(opts.max_backtracks):
            r_new = r - lam * Ad
            f_new = misfit_value(rho, r_new)
            if f_new <= f_ref + opts.decrease * lam * gtd + slack:
                break
            # safeguarded quadratic interpolation
            denom = 2.0 * (f_new - f - lam * gtd)
            lam_q = -gtd * lam * lam / denom if denom > 0 else 0.5 * lam
            lam = lam_q if 0.1 * lam <= lam_q <= 0.5 * lam else 0.5 * lam
        else:
            status = STALLED
            break
        x_new = x + lam * d
        r_new = problem.b - apply(problem.A, x_new)
        f_new = misfit_value(rho, r_new)
        if rho.kind == "two-norm" and f_new == 0.0:
            x, r, f = x_new, r_new, f_new
            status = NONSMOOTH_STOP
            pg = 0.0
            break
        g_new = grad(r_new)
        s_vec, y_vec = x_new - x, g_new - g
        sts, sty = float(s_vec @ s_vec), float(s_vec @ y_vec)
        step = opts.step_max if sty <= 0 else min(max(sts / sty, opts.step_min), opts.step_max)
        x, r, f, g = x_new, r_new, f_new, g_new
        history.append(f)
        pg = _pg_norm(phi, x, g, tau)
    return SpgResult(x, r, f, it, status, pg, log)


def kkt_certificate(problem: ProblemSpec, result: SpgResult, tau: float) -> KktReport:
    """Optimality residuals of a subproblem solution.

    Raises :class:`NonsmoothPointError` when the misfit has no gradient at
    the returned residual.
    """
    phi, rho = problem.regularizer, problem.misfit
    u = misfit_gradient(rho, result.r)
    s = apply_adjoint(problem.A, u)
    feas = reg_value(phi, result.x) - tau
    if tau > 0:
        mu, branch = recover_mu(phi, s, tau)
        supp = support_level_set(phi, s, tau)
    elif phi.is_gauge:
        # lev(phi, 0) = {0}; the gauge multiplier does not depend on tau and
        # gives the right derivative of v at 0
        mu, branch = recover_mu(phi, s, 1.0)
        supp = 0.0
    else:
        mu, branch = np.inf, "degenerate"
        supp = 0.0
    comp = 0.0 if mu == 0.0 or not np.isfinite(mu) else mu * feas
    stat = supp - float(s @ result.x)
    gap = None
    if rho.convex and tau > 0:
        gap = result.f - reduced_dual_value(problem, u, tau)
    return KktReport(u, s, mu, branch, feas, comp, stat, gap)
