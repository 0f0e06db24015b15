import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from vfsolve.calculus import (
    ACTIVE_BRANCH,
    CONE_BRANCH,
    coercivity_check,
    dual_point,
    recover_mu,
    reduced_dual_value,
)
from vfsolve.errors import NoConjugateError
from vfsolve.operators import LinearOperator
from vfsolve.penalties import huber, least_squares, student_t
from vfsolve.problem import ProblemSpec, figure1_problem, figure1_value
from vfsolve.regularizers import (
    Regularizer,
    nonneg_one_norm,
    one_norm,
    two_norm,
    vapnik_affine_qs,
)


@given(arrays(np.float64, 2, elements=st.floats(-4, 4)), st.floats(0.01, 5.0))
def test_weak_duality_on_figure1(u, tau):
    assert reduced_dual_value(figure1_problem(), u, tau) <= figure1_value(tau) + 1e-12


@pytest.mark.parametrize("tau", [0.5, 1.0, 2.0, 2.5])
def test_dual_optimum_closes_gap(fig1, tau):
    x = np.array([tau, 0.0]) if tau < 1 else np.array([0.5 * (tau + 1), 0.5 * (tau - 1)])
    u = fig1.residual(x)
    assert reduced_dual_value(fig1, u, tau) == pytest.approx(figure1_value(tau), abs=1e-12)
    dp = dual_point(fig1, u, tau)
    assert dp.mu == pytest.approx(np.max(np.abs(u)))


def test_dual_outside_domain_is_minus_inf():
    p = ProblemSpec(LinearOperator.identity(2), np.array([2.0, 1.0]), huber(0.5), one_norm())
    assert reduced_dual_value(p, [0.6, 0.0], 1.0) == -np.inf


def test_student_t_has_no_reduced_dual():
    p = ProblemSpec(LinearOperator.identity(2), np.array([2.0, 1.0]), student_t(1.0), one_norm())
    with pytest.raises(NoConjugateError):
        reduced_dual_value(p, [0.1, 0.1], 1.0)


def test_branches():
    assert recover_mu(one_norm(), [1.0, -3.0], 1.0) == (3.0, ACTIVE_BRANCH)
    assert recover_mu(nonneg_one_norm(), [-1.0, -3.0], 1.0) == (0.0, CONE_BRANCH)
    assert recover_mu(one_norm(), [0.0, 0.0], 1.0) == (0.0, CONE_BRANCH)
    assert recover_mu(one_norm(), [1e-9, 0.0], 1.0, atol=1e-8) == (0.0, CONE_BRANCH)
    # upper half-plane plus the Euclidean norm: s pointing down is normal to the cone
    assert recover_mu(two_norm((1,)), [0.0, -1.0], 1.0) == (0.0, CONE_BRANCH)
    mu, status = recover_mu(two_norm((1,)), [3.0, 4.0], 1.0)
    assert status == ACTIVE_BRANCH and mu == pytest.approx(5.0)


def test_coercivity_flags():
    fig = ProblemSpec(LinearOperator.identity(2), np.array([2.0, 1.0]), least_squares(), one_norm())
    assert coercivity_check(fig, 1.0) == {"primal": True, "dual": True}
    vap = ProblemSpec(LinearOperator.identity(2), np.zeros(2), least_squares(), vapnik_affine_qs(2, 0.1))
    assert coercivity_check(vap, 1.0)["primal"]
    # phi(x) = |x_1|: the x_2 direction is a horizon direction of phi
    flat = Regularizer("affine-qs", quadratic=False, H=np.array([[1.0, 0.0], [-1.0, 0.0]]), c=np.zeros(2),
                       lower=np.zeros(2), upper=np.ones(2))
    full = ProblemSpec(LinearOperator.identity(2), np.zeros(2), least_squares(), flat)
    thin = ProblemSpec(LinearOperator.from_matrix(np.array([[1.0, 0.0]])), np.zeros(1), least_squares(), flat)
    assert coercivity_check(full, 1.0)["primal"]
    assert not coercivity_check(thin, 1.0)["primal"]
    t = ProblemSpec(LinearOperator.from_matrix(np.array([[1.0, 0.0]])), np.zeros(1), student_t(1.0), flat)
    assert not coercivity_check(t, 1.0)["primal"]
