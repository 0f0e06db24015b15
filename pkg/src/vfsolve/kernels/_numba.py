"""numba-compiled kernels; same names and semantics as ``_numpy``."""
import numpy as np
from numba import njit

_BISECT_ITERS = 200


@njit(cache=True)
def proj_l1(x, tau):
    n = x.shape[0]
    total = 0.0
    for i in range(n):
        total += abs(x[i])
    out = np.empty(n)
    if total <= tau:
        for i in range(n):
            out[i] = x[i]
        return out
    if tau <= 0.0:
        out[:] = 0.0
        return out
    u = np.sort(np.abs(x))[::-1]
    css = u[0]
    theta = u[0] - tau
    for j in range(1, n):
        css += u[j]
        t = (css - tau) / (j + 1.0)
        if u[j] > t:
            theta = t
    for i in range(n):
        a = abs(x[i]) - theta
        if a > 0.0:
            out[i] = a if x[i] > 0.0 else -a
        else:
            out[i] = 0.0
    return out


@njit(cache=True)
def proj_nonneg_l1(x, tau):
    n = x.shape[0]
    y = np.empty(n)
    total = 0.0
    for i in range(n):
        y[i] = x[i] if x[i] > 0.0 else 0.0
        total += y[i]
    if total <= tau:
        return y
    return proj_l1(y, tau)


@njit(cache=True)
def huber_sum(r, kappa):
    s = 0.0
    for i in range(r.shape[0]):
        a = abs(r[i])
        if a <= kappa:
            s += 0.5 * r[i] * r[i]
        else:
            s += kappa * a - 0.5 * kappa * kappa
    return s


@njit(cache=True)
def huber_grad(r, kappa):
    out = np.empty(r.shape[0])
    for i in range(r.shape[0]):
        out[i] = min(max(r[i], -kappa), kappa)
    return out


@njit(cache=True)
def student_t_sum(r, nu):
    s = 0.0
    for i in range(r.shape[0]):
        s += np.log1p(r[i] * r[i] / nu)
    return s


@njit(cache=True)
def student_t_grad(r, nu):
    out = np.empty(r.shape[0])
    for i in range(r.shape[0]):
        out[i] = 2.0 * r[i] / (nu + r[i] * r[i])
    return out


@njit(cache=True)
def _huber_prox(y, kappa, lam):
    out = np.empty(y.shape[0])
    for i in range(y.shape[0]):
        if abs(y[i]) <= kappa * (1.0 + lam):
            out[i] = y[i] / (1.0 + lam)
        elif y[i] > 0.0:
            out[i] = y[i] - lam * kappa
        else:
            out[i] = y[i] + lam * kappa
    return out


@njit(cache=True)
def proj_huber_level(x, kappa, tau):
    if huber_sum(x, kappa) <= tau:
        return x.copy()
    if tau <= 0.0:
        return np.zeros(x.shape[0])
    hi = max(np.sqrt(np.dot(x, x)) / np.sqrt(2.0 * tau), np.max(np.abs(x)) / kappa)
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
