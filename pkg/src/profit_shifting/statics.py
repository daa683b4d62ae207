"""Tax-sensitivity derivatives at an equilibrium and the sign propositions built on them.

Derivatives are taken with respect to the shifting incentive T. When t1
varies this is the ordinary derivative in t1; when t2 varies it is minus the
derivative in t2, since dT/dt2 = -1. The index c in C_c' and B_c' follows the
rate being varied.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np

from .errors import (
    MixedMuSigns,
    MonotoneConditionFails,
    NoInteriorSolution,
    SingularSystem,
)
from .model import (
    ConditionRegime,
    MinorSet,
    Scenario,
    SecondOrderStructure,
    alp_conditions,
    marginals,
)
from .solver import Equilibrium, certify

Wrt = Literal["t1", "t2"]

SIGN_TOL = 1e-9
SINGULAR_TOL = 1e-12


def sign_of(value: float, tol: float = SIGN_TOL) -> int:
    """-1, 0 or 1, with a neutral zone of half-width ``tol``."""
    if abs(value) <= tol:
        return 0
    return 1 if value > 0 else -1


def share_sign(a: float, b: float, tol: float = SIGN_TOL) -> bool:
    return not ((a > tol and b < -tol) or (a < -tol and b > tol))


def classify_dominance(D: float) -> str:
    s = sign_of(D)
    return {1: "complementary", -1: "substitute", 0: "neutral"}[s]


@dataclass(frozen=True)
class StaticsReport:
    wrt: str
    constrained: bool
    binding: bool
    x1T: float
    x2T: float
    yT: float
    lambdaT: Optional[float]
    mu: tuple[float, float, float]
    mu_bar: Optional[tuple[float, float, float]]
    phi_x: Optional[float]
    phi_y: Optional[float]
    phi_lambda: Optional[float]
    phi_lambda_weighted: Optional[float]
    interior_value: Optional[float]
    interior_bracket: tuple[float, float]
    interior_from_weights: bool
    z_plus: Optional[float]
    lambda1: int
    regime: ConditionRegime
    dominance: str
    dominance_term: float
    mixed_mu_signs: bool
    monotone_condition: bool
    cost_marginal: float
    interest_marginal: float
    sos: SecondOrderStructure
    minors: MinorSet
    t1: float
    residual: float
    assumption_failures: tuple[str, ...] = ()

    @property
    def sum_xT(self) -> float:
        return self.x1T + self.x2T

    @property
    def L_mu_interior(self) -> Optional[float]:
        return self.interior_value if self.constrained else None

    @property
    def M_mu_interior(self) -> Optional[float]:
        return None if self.constrained else self.interior_value

    @property
    def assumptions_hold(self) -> bool:
        return not self.assumption_failures

    @property
    def cross_sum(self) -> float:
        return self.sos.L1y + self.sos.L2y

    @property
    def price_main_effect(self) -> float:
        """C_c'(1/p1 - 1/p2), equal to -(mu1 + mu2)."""
        return -(self.mu[0] + self.mu[1])

    @property
    def interest_main_effect(self) -> float:
        """1 - B_c'/r, equal to -mu_r."""
        return -self.mu[2]


def assumption_failures(eq: Equilibrium, sc: Scenario) -> tuple[str, ...]:
    """Names of the standing curvature assumptions that fail at ``eq``.

    The sign propositions presume concavity, signed adjacent minors and
    convexities that dominate the cross-variations, at an interior optimum.
    """
    out = []
    if not certify(eq, sc).passed:
        out.append("second-order certificate")
    m = eq.minors
    if not m.M12 <= SIGN_TOL:
        out.append("M12 <= 0")
    if not m.M13 >= -SIGN_TOL:
        out.append("M13 >= 0")
    if not m.M23 >= -SIGN_TOL:
        out.append("M23 >= 0")
    if not max(abs(m.M12), m.M13, m.M23) < min(m.M11, m.M22, m.M33):
        out.append("minor dominance")
    if eq.boundary:
        out.append("interior solution")
    return tuple(out)


def _solve_checked(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    scale = float(np.prod(np.linalg.norm(A, axis=1)))
    if scale == 0 or abs(np.linalg.det(A)) < SINGULAR_TOL * scale:
        raise SingularSystem(f"determinant below {SINGULAR_TOL:g} x row-norm product")
    return np.linalg.solve(A, b)


def _relative_residual(A: np.ndarray, x: np.ndarray, b: np.ndarray) -> float:
    denom = np.linalg.norm(A, np.inf) * np.linalg.norm(x, np.inf) + np.linalg.norm(b, np.inf)
    return float(np.linalg.norm(A @ x - b, np.inf) / denom) if denom > 0 else 0.0


def _weighted(w1: float, w2: float, v1: float, v2: float) -> Optional[float]:
    """(w1*v1 + w2*v2)/(w1 + w2) when the weights share a sign, else None."""
    if not share_sign(w1, w2):
        return None
    s = w1 + w2
    if s == 0.0:
        return None
    return (w1 * v1 + w2 * v2) / s


def _shocks(sc: Scenario, eq: Equilibrium, wrt: Wrt):
    if wrt not in ("t1", "t2"):
        raise ValueError(f"wrt must be 't1' or 't2', got {wrt!r}")
    c = 1 if wrt == "t1" else 2
    m = marginals(sc, eq.vars)
    Cc, Bc = m.cost(c), m.interest(c)
    mu = (1.0 - Cc / sc.p1, -1.0 + Cc / sc.p2, -1.0 + Bc / sc.r)
    return mu, Cc, Bc, alp_conditions(sc.p1, sc.p2, sc.r, m)


def _require_interior(eq: Equilibrium) -> None:
    if eq.boundary:
        raise NoInteriorSolution(f"equilibrium on the boundary in {eq.boundary}")


def statics_unconstrained(
    eq: Equilibrium, sc: Scenario, wrt: Wrt, strict: bool = False
) -> StaticsReport:
    """Solve H (x1T, x2T, yT) = mu and derive the bounded cross-effect parameters."""
    _require_interior(eq)
    sos, M = eq.sos, eq.minors
    mu, Cc, Bc, regime = _shocks(sc, eq, wrt)
    H = sos.hessian()
    mu_v = np.array(mu)
    x = _solve_checked(H, mu_v)
    a1 = (M.M12 - M.M11) / M.M33
    a2 = (M.M12 - M.M22) / M.M33
    bracket = (min(a1, a2), max(a1, a2))
    mixed = not share_sign(mu[0], mu[1])
    M_mu = _weighted(mu[0], mu[1], a1, a2)
    from_weights = M_mu is not None
    if M_mu is None and not mixed:
        M_mu = 0.5 * (a1 + a2)
    t13, t23 = M.M13 / M.M33, M.M23 / M.M33
    d = t13 - t23
    phi_x = -d / M_mu if M_mu is not None else None
    D = -(sos.L22 * sos.L1y + sos.L11 * sos.L2y)
    null_cross = sos.L1y == 0.0 and sos.L2y == 0.0
    monotone = null_cross or sign_of(D) == sign_of(mu[0] - mu[1])
    phi_y = None
    if null_cross:
        phi_y = 0.0
    elif monotone:
        phi_y = _weighted(mu[0], mu[1], t13, -t23)
    report = StaticsReport(
        wrt=wrt,
        constrained=False,
        binding=False,
        x1T=float(x[0]),
        x2T=float(x[1]),
        yT=float(x[2]),
        lambdaT=None,
        mu=mu,
        mu_bar=None,
        phi_x=phi_x,
        phi_y=phi_y,
        phi_lambda=None,
        phi_lambda_weighted=None,
        interior_value=M_mu,
        interior_bracket=bracket,
        interior_from_weights=from_weights,
        z_plus=None,
        lambda1=0,
        regime=regime,
        dominance=classify_dominance(D),
        dominance_term=D,
        mixed_mu_signs=mixed,
        monotone_condition=monotone,
        cost_marginal=Cc,
        interest_marginal=Bc,
        sos=sos,
        minors=M,
        t1=sc.taxes.t1,
        residual=_relative_residual(H, x, mu_v),
        assumption_failures=assumption_failures(eq, sc),
    )
    if strict:
        if mixed:
            raise MixedMuSigns(mu[0], mu[1], report)
        if not monotone:
            raise MonotoneConditionFails(D, mu[0] - mu[1], report)
    return report


def statics_constrained(
    eq: Equilibrium, sc: Scenario, wrt: Wrt, strict: bool = False
) -> StaticsReport:
    """Solve the bordered system in (lambdaT, x1T, x2T, yT) under a thin-cap rule.

    The border row pins yT = (ybar - y*)/t1, so the remaining unknowns follow
    from a 2x2 block with the substituted shocks mu_bar.
    """
    if sc.thin_cap is None or eq.ybar is None:
        raise ValueError("statics_constrained needs a scenario with a thin-cap rule")
    _require_interior(eq)
    sos, M = eq.sos, eq.minors
    mu, Cc, Bc, regime = _shocks(sc, eq, wrt)
    t1 = sc.taxes.t1
    lam1 = 1 if (eq.lambda_star == 1 and wrt == "t1") else 0
    z = (eq.ybar - eq.vars.y) / t1
    Hb = sos.bordered_hessian()
    rhs = np.array([-t1 * z, mu[0], mu[1], mu[2] + lam1])
    _solve_checked(Hb, rhs)

    yT = z
    mb1 = mu[0] - sos.L1y * yT
    mb2 = mu[1] - sos.L2y * yT
    mbr = mu[2] + lam1 - sos.Lyy * yT
    x1T = (mb1 * sos.L22 - mb2 * sos.L12) / M.M33
    x2T = (mb2 * sos.L11 - mb1 * sos.L12) / M.M33
    lamT = (sos.L1y * x1T + sos.L2y * x2T + sos.Lyy * yT - mu[2] - lam1) / t1
    sol = np.array([lamT, x1T, x2T, yT])

    e1, e2 = sos.L11 - sos.L12, sos.L22 - sos.L12
    bracket = (min(e1, e2), max(e1, e2))
    mixed = not share_sign(mb1, mb2)
    L_mu = _weighted(mb1, mb2, e2, e1)
    from_weights = L_mu is not None
    if L_mu is None and not mixed:
        L_mu = 0.5 * (e1 + e2)
    t13, t23 = M.M13 / M.M33, M.M23 / M.M33
    D = -(sos.L22 * sos.L1y + sos.L11 * sos.L2y)
    null_cross = sos.L1y == 0.0 and sos.L2y == 0.0
    monotone = null_cross or sign_of(D) == sign_of(mb1 - mb2)
    report = StaticsReport(
        wrt=wrt,
        constrained=True,
        binding=eq.binding,
        x1T=x1T,
        x2T=x2T,
        yT=yT,
        lambdaT=lamT,
        mu=mu,
        mu_bar=(mb1, mb2, mbr),
        phi_x=None,
        phi_y=None,
        phi_lambda=t13 - t23,
        phi_lambda_weighted=0.0 if null_cross else _weighted(mb1, mb2, t13, -t23),
        interior_value=L_mu,
        interior_bracket=bracket,
        interior_from_weights=from_weights,
        z_plus=z,
        lambda1=lam1,
        regime=regime,
        dominance=classify_dominance(D),
        dominance_term=D,
        mixed_mu_signs=mixed,
        monotone_condition=monotone,
        cost_marginal=Cc,
        interest_marginal=Bc,
        sos=sos,
        minors=M,
        t1=t1,
        residual=_relative_residual(Hb, sol, rhs),
        assumption_failures=assumption_failures(eq, sc),
    )
    if strict and mixed:
        raise MixedMuSigns(mb1, mb2, report)
    return report


def statics(eq: Equilibrium, sc: Scenario, wrt: Wrt, strict: bool = False) -> StaticsReport:
    """Dispatch on whether the scenario carries a thin-cap rule."""
    if sc.thin_cap is None:
        return statics_unconstrained(eq, sc, wrt, strict)
    return statics_constrained(eq, sc, wrt, strict)


@dataclass(frozen=True)
class ShadowVerdict:
    """Sign analysis of lambdaT, the response of the thin-cap indicator.

    ``t1 * lambdaT`` splits exactly into ``cross_term + interest_term +
    Lyy * yT``. With the weighted parameter the cross term equals
    ``price_term + yT * phi * (L1y + L2y)``.
    """

    branch: str
    lambdaT: float
    expected: str
    consistent: bool
    cross_term: float
    interest_term: float
    curvature_term: float
    price_term: Optional[float]
    phi: Optional[float]
    combination: Optional[str]
    decomposition_error: float


def lambda_shadow_analysis(eq: Equilibrium, sc: Scenario, report: StaticsReport) -> ShadowVerdict:
    if not report.constrained or report.lambdaT is None or report.mu_bar is None:
        raise ValueError("shadow-cost analysis needs a constrained statics report")
    sos, M = report.sos, report.minors
    mb1, mb2, _ = report.mu_bar
    t13, t23 = M.M13 / M.M33, M.M23 / M.M33
    cross = -(mb1 * t13 - mb2 * t23)
    interest = 1.0 - report.lambda1 - report.interest_marginal / sc.r
    curvature = sos.Lyy * report.yT
    phi = report.phi_lambda_weighted
    price = phi * report.price_main_effect if phi is not None else None
    if phi is not None:
        curvature_full = report.yT * (phi * (sos.L1y + sos.L2y) + sos.Lyy)
    else:
        curvature_full = curvature
    total = report.t1 * report.lambdaT
    err = abs(total - (cross + interest + curvature))
    binding = report.binding
    expected = "<= 0" if binding else ">= 0"
    s = sign_of(report.lambdaT)
    consistent = s <= 0 if binding else s >= 0
    combination = None
    if binding and phi is not None:
        if report.regime.p1_le_p2 and phi <= SIGN_TOL:
            combination = "p1<=p2, phi<=0"
        elif report.regime.p2_le_p1 and phi >= -SIGN_TOL:
            combination = "p2<=p1, phi>=0"
    return ShadowVerdict(
        branch="binding" if binding else "slack",
        lambdaT=report.lambdaT,
        expected=expected,
        consistent=consistent,
        cross_term=cross,
        interest_term=interest,
        curvature_term=curvature_full,
        price_term=price,
        phi=phi,
        combination=combination,
        decomposition_error=err,
    )


@dataclass(frozen=True)
class Claim:
    quantity: str
    predicted: str
    observed: float
    ok: bool


@dataclass(frozen=True)
class PropositionVerdict:
    name: str
    applicable: bool
    claims: tuple[Claim, ...] = ()
    reason: str = ""

    @property
    def passed(self) -> Optional[bool]:
        if not self.applicable:
            return None
        return all(c.ok for c in self.claims)


PROPOSITIONS = (
    "P1",
    "P2",
    "P3",
    "P4",
    "P5",
    "P6",
    "unconstrained-complement-t2",
    "unconstrained-substitute-t1",
    "unconstrained-complement-t1",
    "unconstrained-substitute-t2",
    "unconstrained-equal-prices",
)


def _ge(name: str, v: float) -> Claim:
    return Claim(name, ">= 0", v, v >= -SIGN_TOL)


def _le(name: str, v: float) -> Claim:
    return Claim(name, "<= 0", v, v <= SIGN_TOL)


def _same_sign_claim(report: StaticsReport) -> Claim:
    return Claim("x1T, x2T", "same sign", report.sum_xT, share_sign(report.x1T, report.x2T))


def _sign_match_claim(name: str, observed: float, reference: float, label: str) -> Claim:
    return Claim(name, f"sign of {label}", observed, sign_of(observed) == sign_of(reference))


def _verdict_constrained(name: str, r: StaticsReport) -> PropositionVerdict:
    g = r.regime
    tol = SIGN_TOL

    def na(why: str) -> PropositionVerdict:
        return PropositionVerdict(name, False, reason=why)

    if not r.constrained:
        return na("unconstrained scenario")
    if name == "P1":
        if r.mixed_mu_signs:
            return na("mu_bar signs differ")
        return PropositionVerdict(name, True, (_same_sign_claim(r),))
    if name == "P6":
        if not (g.prices_equal and g.affiliate_complies(1) and g.affiliate_complies(2)):
            return na("full price and cost equality fails")
        if r.mixed_mu_signs:
            return na("mu_bar signs differ")
        ref = r.yT * r.cross_sum
        return PropositionVerdict(name, True, (_sign_match_claim("sum_xT", r.sum_xT, ref, "yT*(L1y+L2y)"),))
    want_binding = name in ("P2", "P3")
    if r.binding != want_binding:
        return na("binding status differs")
    if name in ("P2", "P4"):
        if r.wrt != "t2" or not g.affiliate_complies(2):
            return na("needs wrt=t2 and p1 <= C2' <= p2")
        if name == "P4" and not r.cross_sum >= -tol:
            return na("needs L1y + L2y >= 0")
        if name == "P4" and r.mixed_mu_signs:
            return na("mu_bar signs differ")
        return PropositionVerdict(name, True, (_ge("sum_xT", r.sum_xT),))
    if r.wrt != "t1" or not g.affiliate_complies(1):
        return na("needs wrt=t1 and p2 <= C1' <= p1")
    if name == "P5" and not r.cross_sum <= tol:
        return na("needs L1y + L2y <= 0")
    if name == "P5" and r.mixed_mu_signs:
        return na("mu_bar signs differ")
    return PropositionVerdict(name, True, (_le("sum_xT", r.sum_xT),))


# name -> (varied rate, affiliate whose conditions apply, phi sign, sum claim, yT claim)
UNCONSTRAINED_REGIMES = {
    "unconstrained-complement-t2": ("t2", 2, 1, 1, 1),
    "unconstrained-substitute-t1": ("t1", 2, -1, 1, -1),
    "unconstrained-complement-t1": ("t1", 1, 1, -1, -1),
    "unconstrained-substitute-t2": ("t2", 1, -1, -1, 1),
}


def _phi_ok(phi: Optional[float], sign: int) -> bool:
    if phi is None:
        return False
    return phi >= -SIGN_TOL if sign > 0 else phi <= SIGN_TOL


def _verdict_unconstrained(name: str, r: StaticsReport) -> PropositionVerdict:
    g = r.regime

    def na(why: str) -> PropositionVerdict:
        return PropositionVerdict(name, False, reason=why)

    if r.constrained:
        return na("constrained scenario")
    if r.mixed_mu_signs:
        return na("mu signs differ")
    if name == "unconstrained-equal-prices":
        if not (g.prices_equal and g.affiliate_complies(1) and g.affiliate_complies(2)):
            return na("full price and cost equality fails")
        ref = (r.phi_x or 0.0) * r.interest_main_effect
        return PropositionVerdict(
            name, True, (_sign_match_claim("sum_xT", r.sum_xT, ref, "phi*(1-B'/r)"),)
        )
    wrt, aff, phi_sign, sum_sign, y_sign = UNCONSTRAINED_REGIMES[name]
    if r.wrt != wrt:
        return na(f"needs wrt={wrt}")
    if not g.affiliate_complies(aff):
        return na(f"affiliate {aff} arm's-length conditions fail")
    if not g.cost_of_funds:
        return na("cost-of-funds condition fails")
    if not _phi_ok(r.phi_x, phi_sign):
        return na("phi_x sign premise fails")
    if not _phi_ok(r.phi_y, phi_sign):
        return na("phi_y undefined or sign premise fails")
    claims = (
        _ge("sum_xT", r.sum_xT) if sum_sign > 0 else _le("sum_xT", r.sum_xT),
        _ge("yT", r.yT) if y_sign > 0 else _le("yT", r.yT),
    )
    return PropositionVerdict(name, True, claims)


def audit_proposition(name: str, report: StaticsReport) -> PropositionVerdict:
    if name not in PROPOSITIONS:
        raise ValueError(f"unknown proposition {name!r}")
    if report.assumption_failures:
        return PropositionVerdict(
            name, False, reason="assumption set fails: " + ", ".join(report.assumption_failures)
        )
    if name.startswith("unconstrained"):
        return _verdict_unconstrained(name, report)
    return _verdict_constrained(name, report)


def audit_propositions(report: StaticsReport) -> list[PropositionVerdict]:
    """One verdict per proposition; unmet premises give a not-applicable entry."""
    return [audit_proposition(name, report) for name in PROPOSITIONS]
