import dataclasses

import numpy as np
import pytest

from conftest import make_scenario
from profit_shifting.calibrate import EquilibriumTargets, calibrate
from profit_shifting.errors import MixedMuSigns, NoInteriorSolution
from profit_shifting.model import DecisionVars, second_order
from profit_shifting.solver import solve
from profit_shifting.statics import (
    PROPOSITIONS,
    audit_proposition,
    audit_propositions,
    lambda_shadow_analysis,
    sign_of,
    statics,
    statics_constrained,
    statics_unconstrained,
)

ZERO_OFF = ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0))

# Values agree with central-difference re-solves to better than 1e-9 relative.
REFERENCE_STATICS = {
    "t1": (0.129904592873, 0.173953608758, -0.30711589714),
    "t2": (0.236815656829, 0.0978105544872, 0.291834691397),
}
BINDING_STATICS = {
    "t1": (0.184397287623, 0.135074083461, -4.19539398926),
    "t2": (0.185050616071, 0.134747419237, 1.61247576593),
}


@pytest.mark.parametrize("wrt", ["t1", "t2"])
def test_reference_unconstrained_frozen(reference, wrt):
    r = statics(solve(reference), reference, wrt)
    assert (r.x1T, r.x2T, r.yT) == pytest.approx(REFERENCE_STATICS[wrt], rel=1e-9)
    assert r.residual < 1e-14
    assert r.lambdaT is None and not r.constrained


@pytest.mark.parametrize("wrt", ["t1", "t2"])
def test_reference_binding_frozen(reference_thin_cap, wrt):
    eq = solve(reference_thin_cap)
    r = statics(eq, reference_thin_cap, wrt)
    assert eq.binding
    assert r.yT == 0.0 and r.z_plus == 0.0
    assert (r.x1T, r.x2T, r.lambdaT) == pytest.approx(BINDING_STATICS[wrt], rel=1e-9)
    assert r.lambda1 == (1 if wrt == "t1" else 0)


def null_cross_scenario(cap=None):
    base = make_scenario(K_f=ZERO_OFF, K_g=ZERO_OFF)
    return calibrate(base, EquilibriumTargets(0.4, 0.3, 0.3, 2.7, 2.6, 0.17, 0.04), cap)


@pytest.mark.parametrize("wrt", ["t1", "t2"])
def test_null_cross_effects(wrt):
    sc = null_cross_scenario("none")
    eq = solve(sc)
    r = statics(eq, sc, wrt)
    sos = eq.sos
    assert sos.L1y == 0 and sos.L2y == 0
    assert r.phi_x == 0 and r.phi_y == 0
    # Goods block and debt channel decouple.
    A = np.array([[sos.L11, sos.L12], [sos.L12, sos.L22]])
    x = np.linalg.solve(A, r.mu[:2])
    assert (r.x1T, r.x2T) == pytest.approx(tuple(x), rel=1e-12)
    assert r.yT == pytest.approx(r.mu[2] / sos.Lyy, rel=1e-12)


def test_null_cross_constrained_has_zero_phi():
    sc = null_cross_scenario("slack")
    r = statics(solve(sc), sc, "t2")
    assert r.phi_lambda == 0 and r.phi_lambda_weighted == 0


def test_statics_rejects_boundary_equilibria():
    sc = make_scenario()
    eq = solve(sc)
    assert eq.boundary
    with pytest.raises(NoInteriorSolution):
        statics(eq, sc, "t1")


def test_wrt_validation(reference):
    with pytest.raises(ValueError):
        statics(solve(reference), reference, "t3")


def test_constrained_needs_cap(reference):
    with pytest.raises(ValueError):
        statics_constrained(solve(reference), reference, "t1")


def test_strict_mode_raises_on_mixed_signs(corpus):
    mixed = [r for r in corpus if not r.details.scenario.constrained
             and r.details.reports["t1"].mixed_mu_signs]
    assert mixed
    rec = mixed[0]
    with pytest.raises(MixedMuSigns) as info:
        statics_unconstrained(rec.details.equilibrium, rec.details.scenario, "t1", strict=True)
    assert info.value.report.mixed_mu_signs


def test_yT_law_on_constrained_solves(corpus):
    for rec in corpus:
        sc, eq = rec.details.scenario, rec.details.equilibrium
        if not sc.constrained:
            continue
        for r in rec.details.reports.values():
            assert r.yT == pytest.approx((eq.ybar - eq.vars.y) / sc.taxes.t1, abs=1e-10)
            assert r.yT >= -1e-10
            if eq.binding:
                assert r.yT == 0.0


def test_negative_mu_bar_gives_positive_sales(corpus):
    seen = 0
    for rec in corpus:
        for r in rec.details.reports.values():
            if r.mu_bar is None or not (r.mu_bar[0] <= 0 and r.mu_bar[1] <= 0):
                continue
            seen += 1
            assert r.x1T >= -1e-12 and r.x2T >= -1e-12
    assert seen


def test_interior_value_sandwich_and_identities(corpus):
    for rec in corpus:
        for r in rec.details.reports.values():
            if r.interior_value is None:
                continue
            lo, hi = r.interior_bracket
            assert lo - 1e-10 <= r.interior_value <= hi + 1e-10
            if not r.interior_from_weights:
                continue
            m = r.minors
            if r.constrained:
                mb1, mb2, _ = r.mu_bar
                assert r.sum_xT * m.M33 == pytest.approx(r.interior_value * (mb1 + mb2), abs=1e-10)
            else:
                mu1, mu2, mur = r.mu
                d = (m.M13 - m.M23) / m.M33
                rhs = (-r.interior_value * (mu1 + mu2) + mur * d) * m.M33 / m.detH
                assert r.sum_xT == pytest.approx(rhs, abs=1e-10)
                assert d == pytest.approx(-r.phi_x * r.interior_value, abs=1e-12)


def test_phi_bounds_on_assumption_set(corpus):
    checked = 0
    for rec in corpus:
        for r in rec.details.reports.values():
            if not r.assumptions_hold:
                continue
            for phi in (r.phi_x, r.phi_lambda):
                if phi is not None:
                    checked += 1
                    assert abs(phi) < 1
    assert checked


def test_shadow_decomposition_is_exact(corpus):
    for rec in corpus:
        for w, r in rec.details.reports.items():
            if not r.constrained:
                continue
            s = lambda_shadow_analysis(rec.details.equilibrium, rec.details.scenario, r)
            assert s.decomposition_error <= 1e-10 * max(1.0, abs(r.t1 * r.lambdaT))


def test_slack_lambda_is_shadow_only(reference):
    sc = dataclasses.replace(reference, thin_cap=calibrate(
        reference, EquilibriumTargets(0.4, 0.4, 0.4, 2.7, 2.7, 0.17, 0.04), "slack").thin_cap)
    eq = solve(sc)
    r = statics(eq, sc, "t1")
    assert not eq.binding and r.lambda1 == 0
    assert r.yT == pytest.approx((eq.ybar - 0.4) / 0.4)


def test_audit_binding_reference(reference_thin_cap):
    eq = solve(reference_thin_cap)
    v = {x.name: x for x in audit_propositions(statics(eq, reference_thin_cap, "t2"))}
    assert set(v) == set(PROPOSITIONS)
    assert v["P2"].applicable and v["P2"].passed
    assert v["P1"].applicable and v["P1"].passed
    assert not v["P3"].applicable
    assert not v["unconstrained-complement-t2"].applicable


def test_audit_rejects_unknown_name(reference):
    with pytest.raises(ValueError):
        audit_proposition("P9", statics(solve(reference), reference, "t1"))


def test_sign_helper():
    assert sign_of(5e-10) == 0 and sign_of(2e-9) == 1 and sign_of(-2e-9) == -1


def test_second_order_is_point_free(reference):
    assert second_order(reference) == second_order(reference, DecisionVars(0.2, 0.3, 0.1))


def test_linear_system_residuals(corpus):
    for _, rep in ((r, rep) for r in corpus for rep in r.details.reports.values()):
        assert rep.residual <= 1e-10


def test_main_effect_dominance(corpus):
    # sum_xT carries the sign of main + cross whenever the interior value exists.
    checked = 0
    for rec in corpus:
        for r in rec.details.reports.values():
            if not r.interior_from_weights:
                continue
            main = r.price_main_effect
            if r.constrained:
                cross = r.yT * r.cross_sum
            else:
                cross = r.phi_x * r.interest_main_effect
            assert sign_of(r.sum_xT) == sign_of(main + cross, 1e-12)
            if abs(main) > abs(cross) and sign_of(r.sum_xT) != 0:
                checked += 1
                assert sign_of(r.sum_xT) == sign_of(main)
    assert checked


def test_phi_sign_follows_minor_gap(corpus):
    # The exact relation: sign(M13 - M23) = sign(D + L12*(L1y + L2y)).
    for rec in corpus:
        for r in rec.details.reports.values():
            s, m = r.sos, r.minors
            exact = r.dominance_term + s.L12 * (s.L1y + s.L2y)
            assert sign_of(m.M13 - m.M23, 1e-12) == sign_of(exact, 1e-12)


def test_dominance_term_is_not_an_exact_phi_sign():
    # With L12 large against the cross effects the two signs part ways.
    from profit_shifting.model import SecondOrderStructure, minors

    s = SecondOrderStructure(-3.0, -1.5, -2.0, 1.0, 1.0, -0.55, -0.4)
    m = minors(s, 0.4)
    D = -(s.L22 * s.L1y + s.L11 * s.L2y)
    assert sign_of(D) == -1
    assert sign_of(m.M13 - m.M23) == 1
