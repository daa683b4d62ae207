import dataclasses

import pytest

from profit_shifting.errors import InvalidParameters
from profit_shifting.forms import ThinCapRule
from profit_shifting.oracle import (
    BranchCrossing,
    default_box,
    fd_statics,
    grid_oracle,
    relative_error,
)
from profit_shifting.solver import solve
from profit_shifting.statics import statics


def ebit1(sc):
    pr = sc.primitives
    return pr.R1.value(sc.s1) - pr.C1.value(sc.s1)


@pytest.mark.parametrize("wrt", ["t1", "t2"])
def test_fd_agrees_unconstrained(reference, wrt):
    eq = solve(reference)
    r = statics(eq, reference, wrt)
    o = fd_statics(reference, wrt, 1e-4, analytic=r, base=eq)
    assert not o.branch_crossing
    assert o.passed
    assert o.max_rel_err < 1e-8


@pytest.mark.parametrize("wrt", ["t1", "t2"])
def test_fd_binding_pins_y(reference_thin_cap, wrt):
    eq = solve(reference_thin_cap)
    o = fd_statics(reference_thin_cap, wrt, 1e-4, analytic=statics(eq, reference_thin_cap, wrt), base=eq)
    assert not o.branch_crossing
    assert o.fd_yT == 0.0
    assert o.passed


def test_branch_crossing_near_the_cap(reference):
    sc = dataclasses.replace(reference, thin_cap=ThinCapRule((0.4 + 1e-5) / ebit1(reference)))
    eq = solve(sc)
    assert not eq.binding
    o = fd_statics(sc, "t1", 1e-4, analytic=statics(eq, sc, "t1"), base=eq)
    assert o.branch_crossing and o.passed is None
    with pytest.raises(BranchCrossing):
        fd_statics(sc, "t1", 1e-4, base=eq, strict=True)


def test_fd_step_leaving_the_rate_range(reference):
    with pytest.raises(InvalidParameters):
        fd_statics(reference, "t2", 0.25)


def test_relative_error_floor():
    assert relative_error(1e-9, 0.0) == pytest.approx(0.1)
    assert relative_error(1.001, 1.0) == pytest.approx(1e-3)


def test_grid_reference_gap(reference):
    eq = solve(reference)
    g = grid_oracle(reference, default_box(eq), 60)
    assert g.evaluated == 60**3
    assert g.best_objective - eq.objective <= 1e-6
    assert g.best_vars.as_tuple() == pytest.approx(eq.vars.as_tuple(), abs=1e-4)


def test_grid_singleton_box(reference):
    eq = solve(reference)
    box = tuple((v, v) for v in eq.vars.as_tuple())
    g = grid_oracle(reference, box, 5)
    assert g.best_vars == eq.vars
    assert g.best_objective == pytest.approx(eq.objective, abs=1e-12)


def test_grid_binding_branch(reference_thin_cap):
    eq = solve(reference_thin_cap)
    g = grid_oracle(reference_thin_cap, default_box(eq), 40)
    assert g.best_objective <= eq.objective + 1e-6


def test_grid_size_guard(reference):
    with pytest.raises(ValueError):
        grid_oracle(reference, ((0, 1), (0, 1), (0, 1)), 0)
