"""Regularizers phi as gauges and quadratic-support (QS) functions.

Catalog
-------
one-norm          ||x||_1 (+ optional nonnegativity on selected coordinates)
nonneg-one-norm   ||x||_1 + indicator(x >= 0)
two-norm          ||x||_2 (+ optional nonnegativity on selected coordinates)
qs                sup_{w in [-kappa, kappa]^n} <x, w> - q/2 ||w||^2 with q in {0, 1};
                  q = 1 is the Huber function, q = 0 is kappa * ||x||_1
affine-qs         psi(Hx + c) with psi a QS function over a box U = [lower, upper]
                  and B = 0 (Vapnik is the standard instance)

For a gauge of the unit ball U intersected with a coordinate cone
X = {x : x_J >= 0}, the level-set support function and the multiplier
reduce to the dual norm of the cone projection of z, since
min_s {sigma(z - s | X) + tau * gauge(s | U°)} is attained at s = P_X(z).
"""
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
from scipy.linalg import norm as _norm2  # BLAS nrm2 scales, so tiny inputs keep full precision
from scipy.optimize import linprog

from . import kernels
from .errors import ConfigError, DimensionError, SolverError, UnsupportedKindError

KINDS = ("one-norm", "nonneg-one-norm", "two-norm", "qs", "affine-qs")
GAUGE_KINDS = ("one-norm", "nonneg-one-norm", "two-norm")

_ALIASES = {
    "one-norm": "one-norm",
    "l1": "one-norm",
    "nonneg-one-norm": "nonneg-one-norm",
    "nonneg-l1": "nonneg-one-norm",
    "two-norm": "two-norm",
    "l2": "two-norm",
    "qs": "qs",
    "huber": "qs",
}


@dataclass(frozen=True, eq=False)
class Regularizer:
    kind: str
    nonneg: Tuple[int, ...] = ()
    kappa: float = 1.0
    quadratic: bool = True
    H: Optional[np.ndarray] = field(default=None, repr=False)
    c: Optional[np.ndarray] = field(default=None, repr=False)
    lower: Optional[np.ndarray] = field(default=None, repr=False)
    upper: Optional[np.ndarray] = field(default=None, repr=False)
    label: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown regularizer kind {self.kind!r}")
        if self.kind == "qs" and not self.kappa > 0:
            raise ConfigError("qs kappa must be positive")
        if self.kind == "affine-qs":
            if self.H is None or self.c is None or self.lower is None or self.upper is None:
                raise ConfigError("affine-qs needs H, c, lower and upper")
            if self.quadratic:
                raise UnsupportedKindError("affine-qs is supported with B = 0 only")
            if np.any(self.lower > 0) or np.any(self.upper < 0):
                raise ConfigError("the box U must contain the origin")

    @property
    def is_gauge(self) -> bool:
        return self.kind in GAUGE_KINDS or (self.kind == "qs" and not self.quadratic)

    @property
    def polyhedral(self) -> bool:
        return self.kind in ("one-norm", "nonneg-one-norm") or (self.kind == "qs" and not self.quadratic)

    def cone_mask(self, n: int) -> np.ndarray:
        """Boolean mask of coordinates constrained to be nonnegative."""
        mask = np.zeros(n, dtype=bool)
        if self.kind == "nonneg-one-norm":
            mask[:] = True
        elif self.nonneg:
            if max(self.nonneg) >= n or min(self.nonneg) < 0:
                raise DimensionError(f"nonneg indices {self.nonneg} out of range for n={n}")
            mask[list(self.nonneg)] = True
        return mask

    @classmethod
    def parse(cls, text: str) -> "Regularizer":
        return parse_regularizer(text)

    def __str__(self):
        if self.label:
            return self.label
        if self.kind == "qs":
            return f"qs:kappa={self.kappa!r}" + ("" if self.quadratic else ",b=0")
        if self.nonneg and self.kind in ("one-norm", "two-norm"):
            return f"{self.kind}:nonneg=" + "+".join(str(i) for i in self.nonneg)
        return self.kind


def parse_regularizer(text: str) -> Regularizer:
    head, _, tail = text.strip().partition(":")
    kind = _ALIASES.get(head.strip().lower())
    if kind is None:
        raise ConfigError(f"unknown regularizer {text!r} (affine-qs is built in code, not parsed)")
    kw = {}
    for item in filter(None, (p.strip() for p in tail.split(","))):
        key, eq, value = item.partition("=")
        key = key.strip().lower()
        if not eq:
            raise ConfigError(f"bad regularizer parameter {item!r}")
        try:
            if key == "kappa":
                kw["kappa"] = float(value)
            elif key == "b":
                kw["quadratic"] = value.strip() not in ("0", "zero")
            elif key == "nonneg":
                kw["nonneg"] = tuple(int(i) for i in value.split("+") if i.strip())
            else:
                raise ConfigError(f"unknown regularizer parameter {key!r}")
        except ValueError:
            raise ConfigError(f"bad regularizer parameter {item!r}") from None
    return Regularizer(kind, **kw)


def one_norm():
    return Regularizer("one-norm")


def nonneg_one_norm():
    return Regularizer("nonneg-one-norm")


def two_norm(nonneg=()):
    return Regularizer("two-norm", nonneg=tuple(nonneg))


def huber_qs(kappa=1.0):
    return Regularizer("qs", kappa=kappa, quadratic=True)


def vapnik_affine_qs(n, epsilon):
    """Vapnik penalty as psi(Hx + c) with H = [I; -I], c = -epsilon, U = [0, 1]^{2n}, B = 0."""
    H = np.vstack([np.eye(n), -np.eye(n)])
    c = -float(epsilon) * np.ones(2 * n)
    return Regularizer(
        "affine-qs", quadratic=False, H=H, c=c,
        lower=np.zeros(2 * n), upper=np.ones(2 * n), label=f"vapnik:epsilon={epsilon!r}",
    )


def _cone_part(phi, z):
    """Projection of z onto the coordinate cone of phi."""
    mask = phi.cone_mask(z.size)
    if not mask.any():
        return z
    return np.where(mask, np.maximum(z, 0.0), z)


def _qs_gauge_U(phi, z):
    return np.max(np.abs(z), initial=0.0) / phi.kappa


def _box_qs_value(y, lower, upper, quadratic):
    if quadratic:
        w = np.clip(y, lower, upper)
        return float(np.sum(y * w - 0.5 * w * w))
    return float(np.sum(np.maximum(lower * y, upper * y)))


def reg_value(phi: Regularizer, x) -> float:
    x = np.asarray(x, dtype=np.float64)
    k = phi.kind
    if k in GAUGE_KINDS:
        if np.any(x[phi.cone_mask(x.size)] < 0):
            return np.inf
        return float(np.sum(np.abs(x))) if k != "two-norm" else float(_norm2(x))
    if k == "qs":
        if phi.quadratic:
            return kernels.huber_sum(x, phi.kappa)
        return phi.kappa * float(np.sum(np.abs(x)))
    return _box_qs_value(phi.H @ x + phi.c, phi.lower, phi.upper, False)


def polar_gauge(phi: Regularizer, z) -> float:
    """Gauge of the polar of the unit ball of phi's gauge part."""
    z = np.asarray(z, dtype=np.float64)
    if phi.kind in ("one-norm", "nonneg-one-norm"):
        return float(np.max(np.abs(z), initial=0.0))
    if phi.kind == "two-norm":
        return float(_norm2(z))
    raise UnsupportedKindError(f"polar_gauge is defined for gauge kinds, not {phi.kind!r}")


def project_level_set(phi: Regularizer, x, tau: float) -> np.ndarray:
    """Euclidean projection of x onto {phi <= tau}."""
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    x = np.asarray(x, dtype=np.float64)
    k = phi.kind
    if k == "nonneg-one-norm":
        return kernels.proj_nonneg_l1(x, tau)
    if k == "one-norm":
        if phi.nonneg:
            return kernels.proj_l1(_cone_part(phi, x), tau)
        return kernels.proj_l1(x, tau)
    if k == "two-norm":
        y = _cone_part(phi, x)
        nrm = _norm2(y)
        return y if nrm <= tau else y * (tau / nrm)
    if k == "qs":
        if phi.quadratic:
            return kernels.proj_huber_level(x, phi.kappa, tau)
        return kernels.proj_l1(x, tau / phi.kappa)
    raise UnsupportedKindError("projection onto affine-qs level sets is not provided")


def _affine_qs_lp(phi, s, tau):
    """min over (r, mu >= 0) of tau*mu - <c, r>  s.t.  H^T r = s,  mu*lower <= r <= mu*upper.

    The LP is positively homogeneous in s, so it is solved for s/||s||_inf
    and rescaled; this keeps the solver's absolute tolerances relative.
    """
    scale = float(np.max(np.abs(s), initial=0.0))
    if scale > 0.0:
        val, mu = _affine_qs_lp_raw(phi, s / scale, tau)
        return val * scale, mu * scale
    return _affine_qs_lp_raw(phi, s, tau)


def _affine_qs_lp_raw(phi, s, tau):
    nu = phi.H.shape[0]
    cost = np.concatenate([-phi.c, [tau]])
    A_eq = np.hstack([phi.H.T, np.zeros((phi.H.shape[1], 1))])
    eye = np.eye(nu)
    A_ub = np.vstack([
        np.hstack([eye, -phi.upper[:, None]]),
        np.hstack([-eye, phi.lower[:, None]]),
    ])
    bounds = [(None, None)] * nu + [(0, None)]
    res = linprog(cost, A_ub=A_ub, b_ub=np.zeros(2 * nu), A_eq=A_eq, b_eq=s,
                  bounds=bounds, method="highs")
    if res.status == 2:
        return np.inf, np.inf
    if res.status != 0:
        raise SolverError(f"affine-qs multiplier LP failed: {res.message}")
    return float(res.fun), float(res.x[-1])


def support_level_set(phi: Regularizer, z, tau: float) -> float:
    """Support function of {phi <= tau} evaluated at z."""
    if not tau > 0:
        raise ValueError("support_level_set requires tau > 0")
    z = np.asarray(z, dtype=np.float64)
    k = phi.kind
    if k in GAUGE_KINDS:
        return tau * polar_gauge(phi, _cone_part(phi, z))
    if k == "qs":
        g = _qs_gauge_U(phi, z)
        if g == 0.0:
            return 0.0
        zb = float(_norm2(z)) if phi.quadratic else 0.0
        if g > zb / np.sqrt(2.0 * tau):
            return tau * g + zb * zb / (2.0 * g)
        return np.sqrt(2.0 * tau) * zb
    return _affine_qs_lp(phi, z, tau)[0]


def multiplier_from_dual(phi: Regularizer, s, tau: float) -> float:
    """Minimizer over mu >= 0 of tau*mu + (phi^*)^pi(s, mu), in closed form."""
    if not tau > 0:
        raise ValueError("multiplier_from_dual requires tau > 0")
    s = np.asarray(s, dtype=np.float64)
    k = phi.kind
    if k in GAUGE_KINDS:
        return polar_gauge(phi, _cone_part(phi, s))
    if k == "qs":
        sb = float(_norm2(s)) if phi.quadratic else 0.0
        return max(_qs_gauge_U(phi, s), sb / np.sqrt(2.0 * tau))
    return _affine_qs_lp(phi, s, tau)[1]


def level_set_bound(phi: Regularizer, tau: float) -> float:
    """A radius R with {phi <= tau} inside the box [-R, R]^n."""
    k = phi.kind
    if k in GAUGE_KINDS:
        return tau
    if k == "qs":
        if phi.quadratic:
            return max(np.sqrt(2.0 * tau), tau / phi.kappa + 0.5 * phi.kappa)
        return tau / phi.kappa
    raise UnsupportedKindError("no level-set bound for affine-qs")
