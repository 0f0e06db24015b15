"""Pure-numpy reference kernels.

Every function here has a twin with the same name and signature in
``_numba``; the two are cross-checked in ``tests/test_kernels.py``.
"""
import numpy as np

_BISECT_ITERS = 200


def proj_l1(x, tau):
    """Euclidean projection onto {z : ||z||_1 <= tau} by sort-and-threshold."""
    a = np.abs(x)
    if a.sum() <= tau:
        return x.copy()
    if tau <= 0.0:
        return np.zeros_like(x)
    u = np.sort(a)[::-1]
    css = np.cumsum(u)
    k = np.arange(1, u.size + 1)
    active = np.nonzero(u * k > css - tau)[0]
    # the largest entry always qualifies; rounding can hide it when tau is tiny
    j = active[-1] if active.size else 0
    theta = (css[j] - tau) / (j + 1.0)
    return np.sign(x) * np.maximum(a - theta, 0.0)


def proj_nonneg_l1(x, tau):
    """Projection onto {z >= 0 : sum(z) <= tau}."""
    y = np.maximum(x, 0.0)
    if y.sum() <= tau:
        return y
    return proj_l1(y, tau)


def huber_sum(r, kappa):
    a = np.abs(r)
    quad = a <= kappa
    return float(np.sum(np.where(quad, 0.5 * r * r, kappa * a - 0.5 * kappa * kappa)))


def huber_grad(r, kappa):
    return np.clip(r, -kappa, kappa)


def student_t_sum(r, nu):
    return float(np.sum(np.log1p(r * r / nu)))


def student_t_grad(r, nu):
    return 2.0 * r / (nu + r * r)


def _huber_prox(y, kappa, lam):
    # prox of lam * huber_kappa, applied componentwise
    inner = np.abs(y) <= kappa * (1.0 + lam)
    return np.where(inner, y / (1.0 + lam), y - lam * kappa * np.sign(y))


def proj_huber_level(x, kappa, tau):
    """Projection onto {z : sum_i huber_kappa(z_i) <= tau}.

    The multiplier of the level constraint is located by bisection; the
    returned point is evaluated at the feasible end of the final bracket.
    """
    if huber_sum(x, kappa) <= tau:
        return x.copy()
    if tau <= 0.0:
        return np.zeros_like(x)
    hi = max(np.sqrt(x @ x) / np.sqrt(2.0 * tau), np.max(np.abs(x)) / kappa)
    while huber_sum(_huber_prox(x, kappa, hi), kappa) > tau:
        hi = 2.0 * hi + 1.0
    lo = 0.0
    for _ in range(_BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if huber_sum(_huber_prox(x, kappa, mid), kappa) > tau:
            lo = mid
        else:
            hi = mid
    return _huber_prox(x, kappa, hi)
