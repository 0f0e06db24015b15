import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from vfsolve.errors import ConfigError, NoConjugateError, NonsmoothPointError
from vfsolve.oracle import conjugate_sup_oracle, huber_sup_oracle
from vfsolve.penalties import (
    Misfit,
    dual_domain_contains,
    huber,
    least_squares,
    misfit_conjugate,
    misfit_gradient,
    misfit_value,
    parse_misfit,
    student_t,
)

vec = arrays(np.float64, st.integers(1, 6), elements=st.floats(-5, 5))
smooth_misfits = st.sampled_from([least_squares(), huber(0.3), huber(2.0), student_t(0.5), student_t(4.0)])
convex_misfits = st.sampled_from([least_squares(), huber(0.5), Misfit("two-norm"),
                                  Misfit("vapnik", epsilon=0.4)])


def test_known_values():
    r = np.array([0.5, -3.0])
    assert misfit_value(least_squares(), r) == pytest.approx(4.625)
    assert misfit_value(huber(1.0), r) == pytest.approx(0.125 + 2.5)
    assert misfit_value(Misfit("two-norm"), [3.0, 4.0]) == pytest.approx(5.0)
    assert misfit_value(Misfit("vapnik", epsilon=1.0), r) == pytest.approx(2.0)
    assert misfit_value(student_t(2.0), [2.0]) == pytest.approx(np.log(3.0))


def test_huber_matches_sup_definition():
    r = np.array([0.5, 3.0, -0.2, -7.0])
    assert misfit_value(huber(1.0), r) == pytest.approx(huber_sup_oracle(r, 1.0), abs=1e-9)


@given(smooth_misfits, vec)
def test_gradient_matches_central_difference(rho, r):
    g = misfit_gradient(rho, r)
    h = 1e-6
    for i in range(r.size):
        e = np.zeros_like(r)
        e[i] = h
        fd = (misfit_value(rho, r + e) - misfit_value(rho, r - e)) / (2 * h)
        # huber has a kink in the second derivative at |r| = kappa
        assert g[i] == pytest.approx(fd, abs=1e-5)


def test_nonsmooth_points():
    with pytest.raises(NonsmoothPointError):
        misfit_gradient(Misfit("two-norm"), np.zeros(3))
    assert np.array_equal(misfit_gradient(Misfit("two-norm"), np.zeros(3), nonsmooth="zero"), np.zeros(3))
    vap = Misfit("vapnik", epsilon=0.5)
    with pytest.raises(NonsmoothPointError):
        misfit_gradient(vap, [0.5, 1.0])
    np.testing.assert_array_equal(misfit_gradient(vap, [0.5, 1.0, -2.0, 0.1], nonsmooth="zero"),
                                  [0.0, 1.0, -1.0, 0.0])


@st.composite
def pairs(draw):
    n = draw(st.integers(1, 6))
    el = st.floats(-5, 5)
    return draw(arrays(np.float64, n, elements=el)), draw(arrays(np.float64, n, elements=el))


@given(convex_misfits, pairs())
def test_fenchel_young_inequality(rho, ru):
    r, u = ru
    conj = misfit_conjugate(rho, u)
    assert misfit_value(rho, r) + conj >= float(r @ u) - 1e-9


@given(st.sampled_from([least_squares(), huber(0.5), huber(2.0)]), vec)
def test_fenchel_young_equality_at_gradient(rho, r):
    u = misfit_gradient(rho, r)
    assert misfit_value(rho, r) + misfit_conjugate(rho, u) == pytest.approx(float(r @ u), abs=1e-9)


@given(st.sampled_from([least_squares(), huber(0.7), Misfit("vapnik", epsilon=0.3)]),
       arrays(np.float64, st.integers(1, 3), elements=st.floats(-0.95, 0.95)))
def test_conjugate_matches_numerical_sup(rho, u):
    if rho.kind == "huber":
        u = u * rho.kappa
    assert misfit_conjugate(rho, u) == pytest.approx(conjugate_sup_oracle(rho, u), rel=1e-6, abs=1e-8)


def test_conjugate_domains():
    assert misfit_conjugate(huber(1.0), [1.5]) == np.inf
    assert conjugate_sup_oracle(huber(1.0), [1.5]) == np.inf
    assert misfit_conjugate(Misfit("two-norm"), [0.6, 0.8]) == 0.0
    assert misfit_conjugate(Misfit("two-norm"), [0.7, 0.8]) == np.inf
    assert not dual_domain_contains(Misfit("vapnik", epsilon=0.1), [1.01])
    with pytest.raises(NoConjugateError):
        misfit_conjugate(student_t(1.0), [0.0])


@pytest.mark.parametrize("text", ["least-squares", "huber:kappa=0.25", "student-t:nu=4.0",
                                  "vapnik:epsilon=0.5", "two-norm"])
def test_parse_round_trip(text):
    rho = parse_misfit(text)
    assert parse_misfit(str(rho)) == rho


def test_parse_aliases_and_errors():
    assert parse_misfit("ls") == least_squares()
    assert parse_misfit("huber:k=2") == huber(2.0)
    for bad in ["cauchy", "huber:kappa", "huber:kappa=x", "huber:kappa=-1", "huber:foo=1"]:
        with pytest.raises(ConfigError):
            parse_misfit(bad)


def test_convexity_flags():
    assert not student_t(1.0).convex and student_t(1.0).smooth
    assert huber(1.0).convex and not Misfit("vapnik").smooth
