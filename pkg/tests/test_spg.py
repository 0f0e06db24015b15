import numpy as np
import pytest
from _corpus import corpus_problem

from vfsolve.operators import LinearOperator
from vfsolve.penalties import Misfit, misfit_value
from vfsolve.problem import ProblemSpec
from vfsolve.regularizers import one_norm, reg_value
from vfsolve.spg import SpgOptions, kkt_certificate, solve_subproblem


def test_figure1_solution(fig1):
    res = solve_subproblem(fig1, 2.0)
    assert res.status == "converged"
    np.testing.assert_allclose(res.x, [1.5, 0.5], atol=1e-10)
    assert res.f == pytest.approx(0.25)


@pytest.mark.parametrize("seed", range(6))
def test_nonmonotone_line_search_invariant(seed):
    problem, x0 = corpus_problem(seed, ("least-squares", "huber")[seed % 2],
                                 ("one-norm", "nonneg-one-norm")[seed // 3])
    tau = 0.5 * reg_value(problem.regularizer, x0)
    opts = SpgOptions(tol=1e-9)
    res = solve_subproblem(problem, tau, opts, trace=True)
    f = [row[1] for row in res.log]
    for k in range(1, len(f)):
        ref = max(f[max(0, k - opts.memory):k])
        assert f[k] <= ref + 1e-12 * max(1.0, abs(ref))


@pytest.mark.parametrize("seed", range(8))
def test_gap_bound_on_corpus(seed):
    problem, x0 = corpus_problem(100 + seed, ("least-squares", "huber")[seed % 2],
                                 ("one-norm", "nonneg-one-norm")[seed // 4])
    tau = 0.4 * reg_value(problem.regularizer, x0)
    tol = 1e-9
    res = solve_subproblem(problem, tau, SpgOptions(tol=tol))
    kkt = kkt_certificate(problem, res, tau)
    assert res.status == "converged"
    assert abs(kkt.gap) <= 10 * tol * (1 + abs(res.f))
    assert kkt.feasibility <= 1e-9 * max(1.0, tau)


def test_iterates_stay_feasible_with_infeasible_warm_start(fig1):
    res = solve_subproblem(fig1, 1.0, warm_start=np.array([10.0, -10.0]), trace=True)
    assert reg_value(fig1.regularizer, res.x) <= 1.0 + 1e-12
    assert res.f == pytest.approx(1.0)


def test_two_norm_misfit_nonsmooth_stop():
    p = ProblemSpec(LinearOperator.identity(2), np.array([0.3, -0.2]), Misfit("two-norm"), one_norm())
    res = solve_subproblem(p, 5.0)
    assert res.status == "nonsmooth-stop"
    assert misfit_value(p.misfit, res.r) == 0.0


def test_max_iter_status(fig1):
    problem, x0 = corpus_problem(3, "huber", "one-norm")
    res = solve_subproblem(problem, 0.5 * reg_value(problem.regularizer, x0), SpgOptions(max_iter=2, tol=1e-14))
    assert res.status == "max-iter" and res.iterations == 2


def test_options_validation(fig1):
    with pytest.raises(ValueError):
        SpgOptions(tol=0.0)
    with pytest.raises(ValueError):
        SpgOptions(memory=0)
    with pytest.raises(ValueError):
        SpgOptions(step_min=1.0, step_max=0.5)
    with pytest.raises(ValueError):
        solve_subproblem(fig1, -1.0)


def test_trace_columns(fig1):
    res = solve_subproblem(fig1, 0.5, trace=True)
    assert all(len(row) == 4 for row in res.log)
    assert res.log[0][0] == 0
