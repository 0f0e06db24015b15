"""Brute-force reference computations for desk-scale instances.

These routines deliberately avoid the closed forms used by the library:
grids and enumerations stand in for projections, multipliers, support
functions and value functions, so that the two routes can be compared.
They are shipped (not test-only) so ``vfsolve verify`` can produce a
report at runtime.
"""
import itertools
import math
from dataclasses import asdict, dataclass
from typing import Callable, Optional

import numpy as np
from scipy.optimize import linprog, minimize_scalar

from .errors import DimensionError, UnsupportedKindError
from .penalties import Misfit
from .problem import ProblemSpec
from .regularizers import Regularizer, level_set_bound

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass
class OracleReport:
    name: str
    oracle: float
    library: float
    abs_err: float
    rel_err: float
    tol: float = np.inf
    passed: bool = True

    def to_dict(self):
        out = asdict(self)
        for k, v in out.items():
            if isinstance(v, float) and not math.isfinite(v):
                out[k] = str(v)
        return out


def compare(name, oracle_value, library_value, tol, relative=True) -> OracleReport:
    """Report on two values (or vectors, compared in max-norm).

    Passes when the discrepancy is at most ``tol`` times ``max(1, |oracle|)``
    (``relative=True``) or ``tol`` (absolute).  Matching infinities agree.
    """
    o = np.asarray(oracle_value, dtype=np.float64)
    l = np.asarray(library_value, dtype=np.float64)
    if o.ndim:
        diff = float(np.max(np.abs(o - l), initial=0.0))
        o_s, l_s = float(np.linalg.norm(o)), float(np.linalg.norm(l))
    else:
        o_s, l_s = float(o), float(l)
        same_inf = math.isinf(o_s) and o_s == l_s
        diff = 0.0 if same_inf else abs(o_s - l_s)
        if math.isnan(diff):
            diff = math.inf
    scale = max(1.0, abs(o_s)) if relative and math.isfinite(o_s) else 1.0
    rel = diff / abs(o_s) if o_s != 0 and math.isfinite(o_s) else diff
    return OracleReport(name, o_s, l_s, diff, rel, tol, bool(diff <= tol * scale))


# ---------------------------------------------------------------- row-wise helpers

def _misfit_rows(rho: Misfit, R):
    """rho applied to each row of R, straight from the scalar definitions."""
    if rho.kind == "least-squares":
        return 0.5 * np.sum(R * R, axis=1)
    if rho.kind == "two-norm":
        return np.sqrt(np.sum(R * R, axis=1))
    if rho.kind == "huber":
        k = rho.kappa
        a = np.abs(R)
        return np.sum(np.where(a <= k, 0.5 * R * R, k * a - 0.5 * k * k), axis=1)
    if rho.kind == "vapnik":
        return np.sum(np.maximum(np.abs(R) - rho.epsilon, 0.0), axis=1)
    return np.sum(np.log(1.0 + R * R / rho.nu), axis=1)


def _reg_rows(phi: Regularizer, X):
    n = X.shape[1]
    if phi.kind in ("one-norm", "nonneg-one-norm", "two-norm"):
        val = np.sum(np.abs(X), axis=1) if phi.kind != "two-norm" else np.sqrt(np.sum(X * X, axis=1))
        mask = phi.cone_mask(n)
        if mask.any():
            val = np.where(np.any(X[:, mask] < 0, axis=1), np.inf, val)
        return val
    if phi.kind == "qs":
        k = phi.kappa
        a = np.abs(X)
        if not phi.quadratic:
            return k * np.sum(a, axis=1)
        # sup_{|w| <= k} (x w - w^2/2), evaluated from its maximizer w = clip(x)
        w = np.clip(X, -k, k)
        return np.sum(X * w - 0.5 * w * w, axis=1)
    raise UnsupportedKindError("row evaluation is not provided for affine-qs")


# ---------------------------------------------------------------- value function

@dataclass
class GridSpec:
    step: Optional[float] = None
    refinements: int = 2
    factor: int = 10
    max_points: int = 2_000_000
    chunk: int = 500_000


def _grid_min(problem, tau, axes, chunk):
    A = problem.A.to_dense()
    sizes = [len(a) for a in axes]
    total = int(np.prod(sizes))
    best_val, best_x = np.inf, None
    slack = 1e-12 * max(1.0, tau)
    for start in range(0, total, chunk):
        idx = np.unravel_index(np.arange(start, min(total, start + chunk)), sizes)
        X = np.column_stack([axes[d][idx[d]] for d in range(len(axes))])
        feas = _reg_rows(problem.regularizer, X) <= tau + slack
        if not feas.any():
            continue
        X = X[feas]
        vals = _misfit_rows(problem.misfit, problem.b[None, :] - X @ A.T)
        j = int(np.argmin(vals))
        if vals[j] < best_val:
            best_val, best_x = float(vals[j]), X[j].copy()
    return best_val, best_x


def brute_force_value(problem: ProblemSpec, tau: float, grid: Optional[GridSpec] = None):
    """min rho(b - Ax) over a grid of the level set, refined around the incumbent.

    Only for n <= 3.  Returns the value; with a smooth misfit the error is
    governed by the final grid step.
    """
    grid = grid or GridSpec()
    n = problem.n
    if n > 3:
        raise DimensionError("brute_force_value is limited to n <= 3")
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    R = level_set_bound(problem.regularizer, tau)
    mask = problem.regularizer.cone_mask(n)
    if R == 0.0:
        return _grid_min(problem, tau, [np.zeros(1)] * n, grid.chunk)[0]
    step = grid.step
    if step is None:
        per_axis = max(3, int(grid.max_points ** (1.0 / n)))
        step = 2.0 * R / (per_axis - 1)
    axes = []
    for d in range(n):
        lo = 0.0 if mask[d] else -R
        k = int(round((R - lo) / step))
        axes.append(lo + step * np.arange(k + 1))
    val, x = _grid_min(problem, tau, axes, grid.chunk)
    h = step
    for _ in range(grid.refinements):
        h_new = h / grid.factor
        span = 2 * grid.factor
        axes = [x[d] + h_new * np.arange(-span, span + 1) for d in range(n)]
        v2, x2 = _grid_min(problem, tau, axes, grid.chunk)
        if v2 < val:
            val, x = v2, x2
        h = h_new
    return val


def fd_derivative(problem: ProblemSpec, tau: float, h: float = 1e-4, tol: float = 1e-12) -> float:
    """Central difference (v(tau + h) - v(tau - h)) / 2h."""
    from .value_fn import evaluate

    if tau - h < 0:
        raise ValueError("need tau - h >= 0")
    vp = evaluate(problem, tau + h, tol).v
    vm = evaluate(problem, tau - h, tol).v
    return (vp - vm) / (2.0 * h)


# ---------------------------------------------------------------- projections

def projection_qp_oracle(phi: Regularizer, x, tau: float) -> np.ndarray:
    """Exact projection onto a polyhedral level set by face enumeration.

    Every face of the polytope is visited; the point is projected onto the
    face's affine hull (an equality-constrained least-squares problem with a
    closed-form solution), and the nearest feasible candidate is returned.
    """
    y = np.asarray(x, dtype=np.float64)
    n = y.size
    if n > 6:
        raise DimensionError("projection_qp_oracle is limited to n <= 6")
    if phi.kind in ("one-norm", "nonneg-one-norm"):
        radius = tau
    elif phi.kind == "qs" and not phi.quadratic:
        radius = tau / phi.kappa
    else:
        raise UnsupportedKindError("projection_qp_oracle handles polyhedral one-norm level sets")
    mask = phi.cone_mask(n)
    tol = 1e-12 * max(1.0, radius)
    best, best_d = np.zeros(n), float(np.sum(y ** 2))

    def consider(c):
        nonlocal best, best_d
        if np.any(c[mask] < -1e-14) or np.sum(np.abs(c)) > radius + tol:
            return
        d = float(np.sum((c - y) ** 2))
        if d < best_d:
            best, best_d = c, d

    # a face is a sign pattern; on it the projection is y itself (l1 bound
    # slack) or y shifted by a common amount along the signs (bound tight)
    allowed = [(0.0, 1.0) if mask[i] else (-1.0, 0.0, 1.0) for i in range(n)]
    for signs in itertools.product(*allowed):
        sg = np.array(signs)
        S = sg != 0
        if not S.any():
            continue
        consider(np.where(S, y, 0.0))
        lam = (sg[S] @ y[S] - radius) / S.sum()
        consider(np.where(S, y - lam * sg, 0.0))
    return np.where(mask, np.maximum(best, 0.0), best)


# ---------------------------------------------------------------- multipliers

def perspective_conjugate(phi: Regularizer, s, mu: float) -> float:
    """(phi^*)^pi(s, mu) for the catalog kinds, including the mu = 0 closure."""
    s = np.asarray(s, dtype=np.float64)
    if mu < 0:
        return np.inf
    k = phi.kind
    if k in ("one-norm", "nonneg-one-norm", "two-norm"):
        # exists s' in mu*U° with s - s' in the polar of the coordinate cone
        mask = phi.cone_mask(s.size)
        free = s[~mask]
        capped = s[mask]
        if k == "two-norm":
            need = math.sqrt(float(free @ free) + float(np.sum(np.maximum(capped, 0.0) ** 2)))
            return 0.0 if need <= mu else np.inf
        ok = np.all(np.abs(free) <= mu) and np.all(capped <= mu)
        return 0.0 if ok else np.inf
    if k == "qs":
        if mu == 0.0:
            return 0.0 if not np.any(s) else np.inf
        if np.max(np.abs(s), initial=0.0) > mu * phi.kappa:
            return np.inf
        return float(s @ s) / (2.0 * mu) if phi.quadratic else 0.0
    res = linprog(-phi.c, A_eq=phi.H.T, b_eq=s,
                  bounds=list(zip(mu * phi.lower, mu * phi.upper)), method="highs")
    if res.status != 0:
        return np.inf
    return float(res.fun)


def _golden(f, a, b, iters=200, rtol=1e-14):
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if b - a <= rtol * max(1e-300, abs(b)):
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def mu_grid_oracle(phi: Regularizer, s, tau: float, per_decade: int = 40) -> float:
    """argmin over mu in {0} U [1e-8, 1e8] of tau*mu + (phi^*)^pi(s, mu).

    A log-spaced grid locates the minimizer; golden-section search refines it
    within the neighbouring grid cells.
    """
    s = np.asarray(s, dtype=np.float64)

    def p(mu):
        return tau * mu + perspective_conjugate(phi, s, mu)

    p0 = p(0.0)
    grid = np.logspace(-8, 8, 16 * per_decade + 1)
    vals = np.array([p(m) for m in grid])
    i = int(np.argmin(vals))
    if not np.isfinite(vals[i]):
        return 0.0 if np.isfinite(p0) else np.inf
    if np.isfinite(p0) and p0 <= vals[i]:
        return 0.0
    a = grid[i - 1] if i > 0 else 0.0
    b = grid[min(i + 1, grid.size - 1)]
    mu = _golden(p, a, b)
    # the golden midpoint can sit a hair inside an indicator boundary
    if not np.isfinite(p(mu)):
        mu = b if not np.isfinite(p(0.5 * (mu + b))) else 0.5 * (mu + b)
        lo, hi = a, mu
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if np.isfinite(p(mid)):
                hi = mid
            else:
                lo = mid
        mu = hi
    return float(mu)


# ---------------------------------------------------------------- support functions

def _polytope_vertices(phi: Regularizer, n: int, tau: float):
    if phi.kind in ("one-norm", "nonneg-one-norm"):
        free = ~phi.cone_mask(n)
        return np.vstack([np.zeros(n), tau * np.eye(n), -tau * np.eye(n)[free]])
    if phi.kind == "qs" and not phi.quadratic:
        r = tau / phi.kappa
        return np.vstack([r * np.eye(n), -r * np.eye(n)])
    raise UnsupportedKindError("vertex enumeration needs a polyhedral level set")


def support_vertex_oracle(phi: Regularizer, z, tau: float) -> float:
    """max over the vertices of lev(phi, tau) of <z, v>."""
    z = np.asarray(z, dtype=np.float64)
    return float(np.max(_polytope_vertices(phi, z.size, tau) @ z))


def support_sampling_oracle(phi: Regularizer, z, tau: float, n_samples: int = 100_000,
                            seed: int = 0) -> float:
    """max of <z, x> over boundary points of lev(phi, tau) along random rays."""
    z = np.asarray(z, dtype=np.float64)
    n = z.size
    rng = np.random.default_rng(seed)
    D = rng.standard_normal((n_samples, n))
    mask = phi.cone_mask(n)
    D[:, mask] = np.abs(D[:, mask])
    D /= np.linalg.norm(D, axis=1, keepdims=True)
    lo = np.zeros(n_samples)
    hi = np.full(n_samples, level_set_bound(phi, tau) * math.sqrt(n) + 1.0)
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        inside = _reg_rows(phi, D * mid[:, None]) <= tau
        lo = np.where(inside, mid, lo)
        hi = np.where(inside, hi, mid)
    return float(max(0.0, np.max((D * lo[:, None]) @ z)))


# ---------------------------------------------------------------- conjugates and gauges

def conjugate_sup_oracle(rho: Misfit, u, radius: float = 1e3) -> float:
    """sup_r <u, r> - rho(r), coordinatewise for separable misfits.

    A coordinate whose supremum keeps growing when the search interval is
    widened tenfold is reported as unbounded.
    """
    if rho.kind not in ("least-squares", "huber", "vapnik"):
        raise UnsupportedKindError("conjugate_sup_oracle handles separable convex misfits")
    total = 0.0
    for ui in np.asarray(u, dtype=np.float64):
        def neg(r, ui=ui):
            return -(ui * r - float(_misfit_rows(rho, np.array([[r]]))[0]))

        sups = []
        for R in (radius, 10 * radius):
            grid = np.linspace(-R, R, 20001)
            vals = ui * grid - _misfit_rows(rho, grid[:, None])
            j = int(np.argmax(vals))
            lo, hi = grid[max(j - 1, 0)], grid[min(j + 1, grid.size - 1)]
            res = minimize_scalar(neg, bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
            sups.append(max(float(vals[j]), -float(res.fun)))
        if sups[1] > sups[0] + 1e-6 * (1.0 + abs(sups[0])):
            return np.inf
        total += sups[0]
    return total


def huber_sup_oracle(r, kappa: float, points: int = 200_001) -> float:
    """sum_i max over a fine grid of w in [-kappa, kappa] of (w r_i - w^2/2)."""
    w = np.linspace(-kappa, kappa, points)
    return float(sum(np.max(w * ri - 0.5 * w * w) for ri in np.asarray(r, dtype=np.float64)))


def gauge_from_membership(member: Callable[[np.ndarray], bool], x, lam_max: float = 1e6,
                          iters: int = 400) -> float:
    """inf {lam >= 0 : x in lam*U} by bisection on a membership test for U."""
    x = np.asarray(x, dtype=np.float64)
    if not np.any(x):
        return 0.0
    if not member(x / lam_max):
        return np.inf
    lo, hi = 0.0, lam_max
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if mid <= 0.0 or mid == hi:
            break
        if member(x / mid):
            hi = mid
        else:
            lo = mid
    return hi
