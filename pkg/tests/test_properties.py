"""Cross-module invariants as hypothesis properties."""
import numpy as np
import pytest
from _corpus import corpus_problem
from hypothesis import assume, given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from vfsolve.calculus import reduced_dual_value
from vfsolve.operators import LinearOperator, apply, apply_adjoint, gaussian_ensemble
from vfsolve.pareto import ParetoOptions, solve_constrained
from vfsolve.penalties import huber, least_squares, misfit_value
from vfsolve.problem import figure1_problem
from vfsolve.regularizers import (
    Regularizer,
    huber_qs,
    multiplier_from_dual,
    nonneg_one_norm,
    one_norm,
    project_level_set,
    reg_value,
    support_level_set,
    two_norm,
)
from vfsolve.spg import SpgOptions, solve_subproblem
from vfsolve.value_fn import evaluate

seeds = st.integers(0, 2**31 - 1)
vec = arrays(np.float64, st.integers(1, 6), elements=st.floats(-4, 4))
pos_taus = st.floats(0.05, 5.0)
regs = st.sampled_from([one_norm(), nonneg_one_norm(), two_norm(), two_norm((0,)), huber_qs(0.5),
                        huber_qs(2.0), Regularizer("qs", kappa=2.0, quadratic=False)])
families = st.tuples(st.sampled_from(["least-squares", "huber"]), st.sampled_from(["one-norm", "nonneg-one-norm"]))


@given(st.integers(1, 40), st.integers(1, 40), seeds)
def test_adjoint_identity(m, n, seed):
    rng = np.random.default_rng(seed)
    op = LinearOperator.from_matrix(rng.standard_normal((m, n)))
    x, y = rng.standard_normal(n), rng.standard_normal(m)
    lhs, rhs = float(y @ apply(op, x)), float(apply_adjoint(op, y) @ x)
    scale = float(np.abs(y) @ np.abs(op.to_dense()) @ np.abs(x))
    assert abs(lhs - rhs) <= 1e-10 * scale


@given(st.integers(1, 30), st.integers(1, 30), st.floats(1e-3, 10.0), seeds)
def test_ensemble_reproducible(m, n, variance, seed):
    a = gaussian_ensemble(m, n, variance, seed).to_dense()
    np.testing.assert_array_equal(a, gaussian_ensemble(m, n, variance, seed).to_dense())


@given(vec)
def test_huber_tends_to_least_squares(r):
    assert misfit_value(huber(1e6), r) == pytest.approx(misfit_value(least_squares(), r), abs=1e-6)


@given(regs, vec, pos_taus, seeds)
def test_projection_is_nearest_feasible_point(phi, x, tau, seed):
    p = project_level_set(phi, x, tau)
    d = float(np.linalg.norm(x - p))
    rng = np.random.default_rng(seed)
    for _ in range(100):
        y = project_level_set(phi, 3.0 * rng.standard_normal(x.size), tau) * rng.uniform(0.0, 1.0)
        assert d <= float(np.linalg.norm(x - y)) + 1e-12
    np.testing.assert_allclose(project_level_set(phi, p, tau), p, rtol=0, atol=1e-12)


@given(regs, st.integers(1, 6), pos_taus, seeds)
def test_projection_is_nonexpansive(phi, n, tau, seed):
    rng = np.random.default_rng(seed)
    x, y = 3.0 * rng.standard_normal(n), 3.0 * rng.standard_normal(n)
    px, py = project_level_set(phi, x, tau), project_level_set(phi, y, tau)
    assert np.linalg.norm(px - py) <= np.linalg.norm(x - y) + 1e-12


@given(arrays(np.float64, st.integers(1, 5), elements=st.floats(-3, 3)), st.floats(0.2, 5.0))
def test_qs_branches_meet_continuously(z, kappa):
    assume(np.max(np.abs(z)) > 1e-3)
    phi = huber_qs(kappa)
    gamma = float(np.max(np.abs(z))) / kappa
    nz = float(np.linalg.norm(z))
    tau = nz * nz / (2.0 * gamma * gamma)
    linear_branch = tau * gamma + nz * nz / (2.0 * gamma)
    sqrt_branch = np.sqrt(2.0 * tau) * nz
    assert linear_branch == pytest.approx(sqrt_branch, rel=1e-10)
    assert support_level_set(phi, z, tau) == pytest.approx(sqrt_branch, rel=1e-10)
    assert multiplier_from_dual(phi, z, tau) == pytest.approx(gamma, rel=1e-10)


@given(regs, vec, pos_taus, st.floats(1e-3, 1e3))
def test_support_is_positively_homogeneous(phi, z, tau, alpha):
    base = support_level_set(phi, z, tau)
    assert support_level_set(phi, alpha * z, tau) == pytest.approx(alpha * base, rel=1e-12, abs=1e-300)


@given(families, seeds, st.floats(0.05, 1.5), st.floats(0.01, 3.0))
def test_weak_duality_on_corpus(family, seed, frac, scale):
    problem, x0 = corpus_problem(seed % 10_000, *family)
    tau = frac * reg_value(problem.regularizer, x0)
    rng = np.random.default_rng(seed)
    u = scale * rng.standard_normal(problem.m)
    if problem.misfit.kind == "huber":
        u = np.clip(u, -problem.misfit.kappa, problem.misfit.kappa)
    d = reduced_dual_value(problem, u, tau)
    for _ in range(100):
        x = project_level_set(problem.regularizer, rng.standard_normal(problem.n), tau)
        assert d <= problem.objective(x) + 1e-9 * (1 + abs(d))


@given(families, seeds, st.floats(0.05, 1.5), st.integers(0, 60))
def test_every_iterate_is_feasible(family, seed, frac, k):
    problem, x0 = corpus_problem(seed % 10_000, *family)
    tau = frac * reg_value(problem.regularizer, x0)
    warm = 5.0 * np.random.default_rng(seed).standard_normal(problem.n)
    res = solve_subproblem(problem, tau, SpgOptions(max_iter=k), warm_start=warm)
    assert reg_value(problem.regularizer, res.x) <= tau + 1e-10


@given(families, st.integers(0, 10_000), st.floats(0.2, 0.8))
def test_newton_iterates_are_monotone_and_bracketed(family, seed, frac):
    problem, x0 = corpus_problem(seed, *family)
    tau_star = frac * reg_value(problem.regularizer, x0)
    s = evaluate(problem, tau_star, 1e-12)
    assume(s.status == "converged" and s.mu > 1e-3)
    _, trace = solve_constrained(problem, s.v, ParetoOptions(rtol=1e-9))
    taus = trace.taus()
    vs = np.array([r.v for r in trace.rows])
    slack = 1e-8 * (1 + tau_star)
    assert np.all(np.diff(taus) >= -slack)
    assert np.all(np.diff(vs) <= 1e-8 * (1 + vs[0]))
    # loosened inner tolerances never push an iterate past the root
    assert np.all(taus <= tau_star + 1e-6 * (1 + tau_star))
    assert trace.tau == pytest.approx(tau_star, rel=1e-5)


def test_newton_rate_is_superlinear_on_figure1():
    _, trace = solve_constrained(figure1_problem(), 0.25, ParetoOptions(tau0=1.0, rtol=1e-15))
    errs = [abs(t - 2.0) for t in trace.taus() if abs(t - 2.0) > 1e-12]
    ratios = [b / a for a, b in zip(errs, errs[1:])]
    assert len(ratios) >= 2
    assert all(r2 < r1 for r1, r2 in zip(ratios, ratios[1:]))
    assert ratios[-1] < 0.05
