import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from profit_shifting.errors import InvalidParameters, MonotonicityViolation, OutOfValidityRegion
from profit_shifting.forms import (
    BankInterestSchedule,
    ConcealmentQuadratic,
    QuadraticCost,
    QuadraticRevenue,
    ThinCapRule,
    concealment_gradient,
    eval_with_derivatives,
    thin_cap_limit,
)

I3 = ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0))


def fd_gradient(fn, point, h=1e-6):
    out = []
    for i in range(3):
        up, dn = list(point), list(point)
        up[i] += h
        dn[i] -= h
        out.append((fn(*up) - fn(*dn)) / (2 * h))
    return np.array(out)


def test_revenue_values():
    # R(s) = a*s - b*s^2/2 is the form fixed by R(0) = 0, R' = a - b*s and R'' = -b.
    assert eval_with_derivatives(QuadraticRevenue(10, 1), 2) == (18, 8, -1)


def test_cost_at_zero():
    assert eval_with_derivatives(QuadraticCost(0, 2, 1), 0) == (0, 2, 1)


def test_revenue_outside_region():
    with pytest.raises(OutOfValidityRegion):
        QuadraticRevenue(10, 1).evaluate(11)


def test_interest_schedule():
    B = BankInterestSchedule(5.0, 0.1, 0.02)
    v, m, c = B.evaluate(2.0)
    assert v == pytest.approx(0.24)
    assert m == pytest.approx(0.14)
    assert c == 0.02


@pytest.mark.parametrize("bad", [
    lambda: QuadraticRevenue(0, 1),
    lambda: QuadraticRevenue(10, 0),
    lambda: QuadraticCost(-1, 1, 1),
    lambda: QuadraticCost(0, 1, 0),
    lambda: BankInterestSchedule(5, 0.0, 0.1),
    lambda: BankInterestSchedule(5, 0.1, -0.1),
    lambda: ConcealmentQuadratic((1, 1, 0), I3),
    lambda: ConcealmentQuadratic((1, 1, 1), ((1, 0.5, 0), (0.4, 1, 0), (0, 0, 1))),
    lambda: ConcealmentQuadratic((1, 1, 1), ((1, -0.1, 0), (-0.1, 1, 0), (0, 0, 1))),
    lambda: ConcealmentQuadratic((1, 1, 1), ((1, 2, 0), (2, 1, 0), (0, 0, 1))),
    lambda: ThinCapRule(1.5),
    lambda: ThinCapRule(0.3, -1.0),
])
def test_constructor_rejections(bad):
    with pytest.raises(InvalidParameters):
        bad()


def test_psd_check_uses_all_principal_minors():
    # Leading minors are all zero here, yet the matrix is indefinite.
    with pytest.raises(InvalidParameters):
        ConcealmentQuadratic((1, 1, 1), ((0, 0, 0), (0, 0, 1), (0, 1, 0)))


def test_linear_concealment_gradient():
    spec = ConcealmentQuadratic((1, 1, 1))
    assert concealment_gradient(spec, "f", 0.3, 0.7, 0.2) == (-1, 1, 1)


def test_quadratic_term_vanishes_at_origin():
    spec = ConcealmentQuadratic((1, 1, 1), I3)
    assert concealment_gradient(spec, "g", 0, 0, 0) == (1, -1, -1)


def test_concealment_outside_monotone_region():
    # At (2, 0, 0) under f the argument is (-2, 0, 0) and f1 = 1 - 2 < 0.
    spec = ConcealmentQuadratic((1, 1, 1), I3)
    with pytest.raises(MonotonicityViolation):
        concealment_gradient(spec, "f", 2, 0, 0)
    fd = fd_gradient(lambda a, b, c: spec.cost("f", a, b, c), (2.0, 0.0, 0.0))
    assert np.allclose(spec.raw_gradient("f", 2, 0, 0), fd, atol=1e-8)
    assert np.allclose(fd, (1.0, 1.0, 1.0), atol=1e-8)


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.floats(0.5, 3.0), min_size=3, max_size=3),
    st.lists(st.floats(0.0, 0.3), min_size=3, max_size=3),
    st.lists(st.floats(0.0, 0.5), min_size=3, max_size=3),
    st.sampled_from(["f", "g"]),
)
def test_concealment_gradient_matches_fd(kappa, off, point, orientation):
    K = ((1.0, off[0], off[1]), (off[0], 1.0, off[2]), (off[1], off[2], 1.0))
    spec = ConcealmentQuadratic(tuple(kappa), K)
    fd = fd_gradient(lambda a, b, c: spec.cost(orientation, a, b, c), point)
    assert np.allclose(spec.raw_gradient(orientation, *point), fd, rtol=1e-6, atol=1e-7)


def test_thin_cap_limit_examples():
    assert ThinCapRule(0.3).limit_from_ebit(16 - 6) == pytest.approx(3.0)
    assert ThinCapRule(0.3, 0.0).limit_from_ebit(-2) == 0.0
    assert ThinCapRule(0.0).limit_from_ebit(123.0) == 0.0
    # EBIT1 = R1(2) - C1(2) = 18 - 8 = 10.
    R, C = QuadraticRevenue(10, 1), QuadraticCost(0, 3, 1)
    assert thin_cap_limit(ThinCapRule(0.3), R, C, 2.0) == pytest.approx(3.0)
    assert thin_cap_limit(ThinCapRule(0.3), R, QuadraticCost(20, 3, 1), 2.0) == 0.0


@pytest.mark.parametrize("form, point", [
    (QuadraticRevenue(10, 1), 3.3),
    (QuadraticCost(1, 2, 0.4), 2.7),
    (BankInterestSchedule(5, 0.1, 0.02), 4.1),
])
def test_scalar_derivatives_match_fd(form, point):
    v, d1, d2 = form.evaluate(point)
    h1, h2 = 1e-5, 1e-4
    fd1 = (form.value(point + h1) - form.value(point - h1)) / (2 * h1)
    fd2 = (form.value(point + h2) - 2 * v + form.value(point - h2)) / h2**2
    assert abs(fd1 - d1) <= 1e-6 * abs(d1)
    assert abs(fd2 - d2) <= 1e-4 * abs(d2)
