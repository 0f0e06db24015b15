"""Misfit functions rho(r): value, gradient, convex conjugate.

Descriptors parse from strings such as ``"least-squares"``,
``"huber:kappa=1.0"``, ``"vapnik:epsilon=0.5"`` or ``"student-t:nu=4"``.
"""
from dataclasses import dataclass

import numpy as np
from scipy.linalg import norm as _norm2

from . import kernels
from .errors import ConfigError, NoConjugateError, NonsmoothPointError

KINDS = ("least-squares", "two-norm", "huber", "vapnik", "student-t")

_ALIASES = {
    "ls": "least-squares",
    "least-squares": "least-squares",
    "leastsquares": "least-squares",
    "two-norm": "two-norm",
    "l2": "two-norm",
    "huber": "huber",
    "vapnik": "vapnik",
    "student-t": "student-t",
    "studentt": "student-t",
    "student": "student-t",
}

_PARAM_ALIASES = {"kappa": "kappa", "k": "kappa", "epsilon": "epsilon", "eps": "epsilon", "nu": "nu"}


@dataclass(frozen=True)
class Misfit:
    kind: str
    kappa: float = 1.0
    epsilon: float = 0.0
    nu: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown misfit kind {self.kind!r}; expected one of {KINDS}")
        if not self.kappa > 0:
            raise ConfigError("huber kappa must be positive")
        if not self.epsilon >= 0:
            raise ConfigError("vapnik epsilon must be nonnegative")
        if not self.nu > 0:
            raise ConfigError("student-t nu must be positive")

    @property
    def convex(self) -> bool:
        return self.kind != "student-t"

    @property
    def smooth(self) -> bool:
        """True when the gradient exists everywhere."""
        return self.kind in ("least-squares", "huber", "student-t")

    @classmethod
    def parse(cls, text: str) -> "Misfit":
        return parse_misfit(text)

    def __str__(self):
        if self.kind == "huber":
            return f"huber:kappa={self.kappa!r}"
        if self.kind == "vapnik":
            return f"vapnik:epsilon={self.epsilon!r}"
        if self.kind == "student-t":
            return f"student-t:nu={self.nu!r}"
        return self.kind


def parse_misfit(text: str) -> Misfit:
    head, _, tail = text.strip().partition(":")
    kind = _ALIASES.get(head.strip().lower())
    if kind is None:
        raise ConfigError(f"unknown misfit {text!r}")
    params = {}
    for item in filter(None, (p.strip() for p in tail.split(","))):
        key, eq, value = item.partition("=")
        key = _PARAM_ALIASES.get(key.strip().lower())
        if not eq or key is None:
            raise ConfigError(f"bad misfit parameter {item!r} in {text!r}")
        try:
            params[key] = float(value)
        except ValueError:
            raise ConfigError(f"non-numeric misfit parameter {item!r}") from None
    return Misfit(kind, **params)


def least_squares():
    return Misfit("least-squares")


def huber(kappa=1.0):
    return Misfit("huber", kappa=kappa)


def student_t(nu=1.0):
    return Misfit("student-t", nu=nu)


def misfit_value(rho: Misfit, r) -> float:
    r = np.asarray(r, dtype=np.float64)
    k = rho.kind
    if k == "least-squares":
        return 0.5 * float(r @ r)
    if k == "two-norm":
        return float(_norm2(r))
    if k == "huber":
        return kernels.huber_sum(r, rho.kappa)
    if k == "vapnik":
        return float(np.sum(np.maximum(np.abs(r) - rho.epsilon, 0.0)))
    return kernels.student_t_sum(r, rho.nu)


def misfit_gradient(rho: Misfit, r, nonsmooth: str = "raise") -> np.ndarray:
    """Gradient of rho at r.

    At a nondifferentiable point (two-norm at r = 0, vapnik where
    ``|r_i| == epsilon``) this raises :class:`NonsmoothPointError`, unless
    ``nonsmooth="zero"``, in which case the minimum-norm subgradient
    component (zero) is used for the offending entries.
    """
    r = np.asarray(r, dtype=np.float64)
    k = rho.kind
    if k == "least-squares":
        return r.copy()
    if k == "huber":
        return kernels.huber_grad(r, rho.kappa)
    if k == "student-t":
        return kernels.student_t_grad(r, rho.nu)
    if k == "two-norm":
        nrm = _norm2(r)
        if nrm == 0.0:
            if nonsmooth == "zero":
                return np.zeros_like(r)
            raise NonsmoothPointError("two-norm misfit is not differentiable at r = 0")
        return r / nrm
    kink = np.abs(r) == rho.epsilon
    if kink.any() and nonsmooth != "zero":
        raise NonsmoothPointError("vapnik misfit is not differentiable where |r_i| = epsilon")
    g = np.where(np.abs(r) > rho.epsilon, np.sign(r), 0.0)
    return g


def misfit_conjugate(rho: Misfit, u) -> float:
    u = np.asarray(u, dtype=np.float64)
    k = rho.kind
    if k == "student-t":
        raise NoConjugateError("student-t misfit is nonconvex; no conjugate is used")
    if k == "least-squares":
        return 0.5 * float(u @ u)
    if k == "two-norm":
        return 0.0 if _norm2(u) <= 1.0 else np.inf
    if k == "huber":
        return 0.5 * float(u @ u) if np.max(np.abs(u), initial=0.0) <= rho.kappa else np.inf
    if np.max(np.abs(u), initial=0.0) > 1.0:
        return np.inf
    return rho.epsilon * float(np.sum(np.abs(u)))


def dual_domain_contains(rho: Misfit, u) -> bool:
    return np.isfinite(misfit_conjugate(rho, u))
