from dataclasses import dataclass

import numpy as np

from .errors import DimensionError
from .operators import LinearOperator, apply, apply_adjoint
from .penalties import Misfit, least_squares, misfit_gradient, misfit_value
from .regularizers import Regularizer, one_norm


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    """minimize rho(b - Ax) subject to phi(x) <= tau."""

    A: LinearOperator
    b: np.ndarray
    misfit: Misfit
    regularizer: Regularizer

    def __post_init__(self):
        b = np.array(self.b, dtype=np.float64)
        if b.shape != (self.A.m,):
            raise DimensionError(f"b has shape {b.shape}, operator has {self.A.m} rows")
        b.setflags(write=False)
        object.__setattr__(self, "b", b)

    @property
    def m(self):
        return self.A.m

    @property
    def n(self):
        return self.A.n

    def residual(self, x):
        return self.b - apply(self.A, x)

    def objective(self, x) -> float:
        return misfit_value(self.misfit, self.residual(x))

    def gradient(self, x, nonsmooth="raise"):
        return -apply_adjoint(self.A, misfit_gradient(self.misfit, self.residual(x), nonsmooth))

    def with_misfit(self, misfit) -> "ProblemSpec":
        return ProblemSpec(self.A, self.b, misfit, self.regularizer)


def figure1_problem() -> ProblemSpec:
    """A = I_2, b = (2, 1), rho = 0.5||r||^2, phi = ||x||_1."""
    return ProblemSpec(LinearOperator.identity(2), np.array([2.0, 1.0]), least_squares(), one_norm())


def figure1_value(tau: float) -> float:
    """Closed-form value function of :func:`figure1_problem`."""
    if tau < 1.0:
        return 0.5 + 0.5 * (tau - 2.0) ** 2
    if tau < 3.0:
        return 0.25 * (tau - 3.0) ** 2
    return 0.0


def figure1_derivative(tau: float) -> float:
    if tau < 1.0:
        return tau - 2.0
    if tau < 3.0:
        return 0.5 * (tau - 3.0)
    return 0.0


def figure1_penalized_value(lam: float) -> float:
    """Optimal misfit of the penalized form min 0.5||b - x||^2 + lam*||x||_1 on the same data."""
    if lam < 1.0:
        return lam * lam
    if lam < 2.0:
        return 0.5 + 0.5 * lam * lam
    return 2.5
