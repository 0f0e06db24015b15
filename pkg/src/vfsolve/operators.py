"""Linear operators and seeded Gaussian ensembles.

Random streams use numpy's ``Philox`` bit generator (Philox-4x64-10, a
counter-based generator) keyed through ``SeedSequence([seed, stream])``;
normal variates come from ``Generator.standard_normal`` (numpy's ziggurat).
Fixing ``(seed, stream)`` therefore pins every draw bit-for-bit for a given
numpy major version.
"""
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DimensionError

# stream ids keep independent draws of one experiment decorrelated
STREAM_MATRIX = 0
STREAM_SIGNAL = 1
STREAM_NOISE = 2
STREAM_OUTLIERS = 3


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(stream)])))


@dataclass(frozen=True, eq=False)
class LinearOperator:
    """An m-by-n linear map with its adjoint.

    Build with :meth:`from_matrix` (dense, row-major, read-only copy) or
    :meth:`from_functions` (explicit forward/adjoint pair).
    """

    m: int
    n: int
    forward: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    adjoint: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    matrix: Optional[np.ndarray] = field(default=None, repr=False)

    @classmethod
    def from_matrix(cls, A) -> "LinearOperator":
        M = np.array(A, dtype=np.float64, order="C", copy=True)
        if M.ndim != 2 or min(M.shape) < 1:
            raise DimensionError(f"expected a nonempty 2-d matrix, got shape {M.shape}")
        M.setflags(write=False)
        return cls(M.shape[0], M.shape[1], M.dot, M.T.dot, M)

    @classmethod
    def from_functions(cls, m, n, forward, adjoint) -> "LinearOperator":
        if m < 1 or n < 1:
            raise DimensionError("operator dimensions must be positive")
        return cls(int(m), int(n), forward, adjoint, None)

    @classmethod
    def identity(cls, n: int) -> "LinearOperator":
        return cls.from_matrix(np.eye(n))

    @property
    def shape(self):
        return (self.m, self.n)

    def to_dense(self) -> np.ndarray:
        if self.matrix is not None:
            return np.array(self.matrix)
        return np.column_stack([self.forward(e) for e in np.eye(self.n)])


def apply(op: LinearOperator, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (op.n,):
        raise DimensionError(f"apply expects a length-{op.n} vector, got shape {x.shape}")
    return np.asarray(op.forward(x), dtype=np.float64)


def apply_adjoint(op: LinearOperator, y) -> np.ndarray:
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (op.m,):
        raise DimensionError(f"apply_adjoint expects a length-{op.m} vector, got shape {y.shape}")
    return np.asarray(op.adjoint(y), dtype=np.float64)


def gaussian_ensemble(m: int, n: int, variance: float, seed: int) -> LinearOperator:
    """Dense m-by-n matrix with i.i.d. N(0, variance) entries."""
    if m < 1 or n < 1:
        raise DimensionError("ensemble dimensions must be positive")
    if not variance > 0:
        raise ValueError("variance must be positive")
    rng = make_rng(seed, STREAM_MATRIX)
    return LinearOperator.from_matrix(np.sqrt(variance) * rng.standard_normal((m, n)))


def save_csv(op: LinearOperator, path) -> None:
    np.savetxt(path, op.to_dense(), delimiter=",", fmt="%.17g")


def load_csv(path) -> LinearOperator:
    return LinearOperator.from_matrix(np.atleast_2d(np.loadtxt(path, delimiter=",", ndmin=2)))
