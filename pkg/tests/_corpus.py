"""Deterministic random problem families shared by the test modules."""
import numpy as np

from vfsolve.operators import LinearOperator, make_rng
from vfsolve.penalties import huber, least_squares
from vfsolve.problem import ProblemSpec
from vfsolve.regularizers import nonneg_one_norm, one_norm, reg_value
from vfsolve.value_fn import evaluate

CORPUS_STREAM = 20
MISFITS = ("least-squares", "huber")
REGULARIZERS = ("one-norm", "nonneg-one-norm")


def corpus_problem(seed: int, misfit: str, reg: str, max_dim: int = 50) -> ProblemSpec:
    """A random sparse-recovery instance with m, n <= max_dim."""
    rng = make_rng(seed, CORPUS_STREAM)
    m = int(rng.integers(5, max_dim + 1))
    n = int(rng.integers(5, max_dim + 1))
    A = rng.standard_normal((m, n)) / np.sqrt(m)
    k = max(1, n // 5)
    x0 = np.zeros(n)
    idx = rng.choice(n, size=k, replace=False)
    x0[idx] = rng.standard_normal(k) + np.sign(rng.standard_normal(k))
    if reg == "nonneg-one-norm":
        x0 = np.abs(x0)
    b = A @ x0 + 0.05 * rng.standard_normal(m)
    if misfit == "huber":
        spikes = rng.choice(m, size=max(1, m // 10), replace=False)
        b[spikes] += 3.0 * rng.standard_normal(spikes.size)
        rho = huber(float(rng.uniform(0.05, 1.0)))
    else:
        rho = least_squares()
    phi = one_norm() if reg == "one-norm" else nonneg_one_norm()
    return ProblemSpec(LinearOperator.from_matrix(A), b, rho, phi), x0


def active_pairs(count: int, seed0: int = 0, tol: float = 1e-11, min_mu: float = 1e-3):
    """``count`` (problem, tau, sample) triples whose level constraint is active.

    Cycles through the misfit x regularizer grid; tau is a random fraction
    of phi(x0); draws with a tiny multiplier or an unconverged solve are
    skipped (deterministically).
    """
    out = []
    seed = seed0
    while len(out) < count:
        misfit = MISFITS[seed % 2]
        reg = REGULARIZERS[(seed // 2) % 2]
        problem, x0 = corpus_problem(seed, misfit, reg)
        frac = make_rng(seed, CORPUS_STREAM + 1).uniform(0.1, 0.8)
        tau = float(frac * reg_value(problem.regularizer, x0))
        s = evaluate(problem, tau, tol)
        seed += 1
        if s.status != "converged" or not s.differentiable or s.mu < min_mu:
            continue
        out.append((problem, tau, s))
    return out
