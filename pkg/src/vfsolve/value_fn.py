"""Value function v(b, tau) with its gradient from the dual multipliers."""
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import NonsmoothPointError, NotDifferentiableError
from .penalties import misfit_value
from .problem import ProblemSpec
from .spg import KktReport, SpgOptions, kkt_certificate, solve_subproblem


@dataclass
class ValueSample:
    tau: float
    v: float
    x: np.ndarray
    r: np.ndarray
    u: Optional[np.ndarray]
    mu: float
    gap: Optional[float]
    differentiable: bool
    status: str
    iterations: int
    kkt: Optional[KktReport] = None
    pg_norm: float = np.nan

    @property
    def branch(self) -> str:
        return self.kkt.branch if self.kkt is not None else "unknown"


def evaluate(problem: ProblemSpec, tau: float, tol: float = 1e-10,
             opts: Optional[SpgOptions] = None, warm_start=None) -> ValueSample:
    """Solve the subproblem at ``tau`` and attach its dual certificate.

    ``differentiable`` is set when the dual point is unique (the misfit is
    differentiable at the optimal residual) and the multiplier problem has
    a single minimizer, which holds for every catalog kind once tau > 0.
    At tau = 0 the multiplier of a gauge regularizer is still reported and
    equals the right derivative.
    """
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    if opts is None:
        opts = SpgOptions(tol=tol)
    elif opts.tol != tol:
        opts = SpgOptions(**{**opts.__dict__, "tol": tol})
    res = solve_subproblem(problem, tau, opts, warm_start)
    v = misfit_value(problem.misfit, res.r)
    try:
        kkt = kkt_certificate(problem, res, tau)
    except NonsmoothPointError:
        kkt = None
    if kkt is None:
        return ValueSample(tau, v, res.x, res.r, None, np.nan, None, False, res.status, res.iterations,
                           pg_norm=res.pg_norm)
    differentiable = tau > 0 and np.isfinite(kkt.mu)
    return ValueSample(tau, v, res.x, res.r, kkt.u, kkt.mu, kkt.gap, differentiable,
                       res.status, res.iterations, kkt, res.pg_norm)


def tau_derivative(sample: ValueSample) -> float:
    """dv/dtau = -mu."""
    if not sample.differentiable:
        raise NotDifferentiableError(f"value function not certified differentiable at tau={sample.tau}")
    return -sample.mu


def b_subgradient(sample: ValueSample) -> np.ndarray:
    """The data component of the gradient: the dual point u = grad rho(r)."""
    if sample.u is None:
        raise NonsmoothPointError("misfit is not differentiable at the optimal residual")
    return sample.u.copy()


def sweep(problem: ProblemSpec, taus, tol: float = 1e-10, opts: Optional[SpgOptions] = None):
    """Evaluate along a grid of budgets with warm starts; returns a list of samples."""
    out = []
    x = None
    for tau in taus:
        s = evaluate(problem, float(tau), tol, opts, warm_start=x)
        out.append(s)
        x = s.x
    return out
