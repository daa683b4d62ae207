"""The firm's objective: net profits, Lagrangian, first- and second-order structure.

Decision variables are the internal-sale values x1 = p1*q1, x2 = p2*q2 and
the internal interest y = r*b. Prices, interest rate and market sales are
exogenous. The thin-cap indicator ``lam`` is discrete: 0 (slack) or 1
(binding, the excess ``y - ybar`` is taxed a second time in country 1).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import (
    InvalidParameters,
    MissingThinCap,
    NoInteriorSolution,
    SignPatternViolation,
)
from .forms import FirmPrimitives, ThinCapRule, thin_cap_limit

CONDITION_TOL = 1e-9


@dataclass(frozen=True)
class TaxRegime:
    t1: float
    t2: float

    def __post_init__(self) -> None:
        for name in ("t1", "t2"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise InvalidParameters(f"{name} must lie in [0, 1], got {v}")
        if not self.t1 - self.t2 > 0:
            raise InvalidParameters("T = t1 - t2 > 0 required")

    @property
    def T(self) -> float:
        return self.t1 - self.t2


@dataclass(frozen=True)
class Scenario:
    taxes: TaxRegime
    p1: float
    p2: float
    r: float
    s1: float
    s2: float
    primitives: FirmPrimitives
    thin_cap: Optional[ThinCapRule] = None

    def __post_init__(self) -> None:
        for name in ("p1", "p2", "r"):
            v = getattr(self, name)
            if not v > 0:
                raise InvalidParameters(f"{name} must be > 0, got {v}")
        for name in ("s1", "s2"):
            v = getattr(self, name)
            if not v >= 0:
                raise InvalidParameters(f"{name} must be >= 0, got {v}")

    @property
    def constrained(self) -> bool:
        return self.thin_cap is not None

    @property
    def ybar(self) -> Optional[float]:
        if self.thin_cap is None:
            return None
        pr = self.primitives
        return thin_cap_limit(self.thin_cap, pr.R1, pr.C1, self.s1)

    def with_taxes(self, t1: float, t2: float) -> "Scenario":
        return replace(self, taxes=TaxRegime(t1, t2))


@dataclass(frozen=True)
class DecisionVars:
    x1: float
    x2: float
    y: float

    def __post_init__(self) -> None:
        for name in ("x1", "x2", "y"):
            if not getattr(self, name) >= 0:
                raise InvalidParameters(f"{name} must be >= 0, got {getattr(self, name)}")

    def quantities(self, sc: Scenario) -> tuple[float, float, float]:
        """Internal outputs q1, q2 and internal debt b."""
        return self.x1 / sc.p1, self.x2 / sc.p2, self.y / sc.r

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.x1, self.x2, self.y)


@dataclass(frozen=True)
class Marginals:
    """Marginal costs C1', C2' and marginal bank interest B1', B2' at a point."""

    C1: float
    C2: float
    B1: float
    B2: float

    def cost(self, c: int) -> float:
        return self.C1 if c == 1 else self.C2

    def interest(self, c: int) -> float:
        return self.B1 if c == 1 else self.B2


@dataclass(frozen=True)
class SecondOrderStructure:
    L11: float
    L22: float
    Lyy: float
    L12: float
    L1y: float
    L2y: float
    lambda_cross: float

    def hessian(self) -> np.ndarray:
        return np.array(
            [
                [self.L11, self.L12, self.L1y],
                [self.L12, self.L22, self.L2y],
                [self.L1y, self.L2y, self.Lyy],
            ]
        )

    def bordered_hessian(self) -> np.ndarray:
        Hb = np.zeros((4, 4))
        Hb[1:, 1:] = self.hessian()
        Hb[0, 3] = Hb[3, 0] = self.lambda_cross
        return Hb


@dataclass(frozen=True)
class MinorSet:
    M11: float
    M22: float
    M33: float
    detH: float
    Mbar22: float
    Mbar33: float
    detHbar: float
    Mbar14: float
    M12: float
    M13: float
    M23: float


@dataclass(frozen=True)
class ConditionRegime:
    """Arm's-length checks evaluated at the current marginal costs."""

    p1: float
    p2: float
    r: float
    marginals: Marginals
    cost_plus_1: bool
    cost_plus_2: bool
    resale_price_1: bool
    resale_price_2: bool
    cost_of_funds: bool
    p1_le_p2: bool
    p2_le_p1: bool

    @property
    def prices_equal(self) -> bool:
        return self.p1_le_p2 and self.p2_le_p1

    def affiliate_complies(self, c: int) -> bool:
        """Both cost-plus and resale-price hold for affiliate c."""
        if c == 1:
            return self.cost_plus_1 and self.resale_price_1
        return self.cost_plus_2 and self.resale_price_2

    def interest_below_rate(self, c: int) -> bool:
        return _le(self.marginals.interest(c), self.r)

    def rate_below_interest(self, c: int) -> bool:
        return _le(self.r, self.marginals.interest(c))


def _le(a: float, b: float, tol: float = CONDITION_TOL) -> bool:
    return a <= b + tol


def _arguments(sc: Scenario, x1, x2, y):
    pr = sc.primitives
    u1 = sc.s1 + x1 / sc.p1 - x2 / sc.p2
    u2 = sc.s2 + x2 / sc.p2 - x1 / sc.p1
    d1 = pr.B1.baseline_debt - y / sc.r
    d2 = pr.B2.baseline_debt + y / sc.r
    return u1, u2, d1, d2


def check_validity(sc: Scenario, vars: DecisionVars) -> None:
    """Raise if any functional form leaves its validity region at ``vars``."""
    pr = sc.primitives
    u1, u2, d1, d2 = _arguments(sc, *vars.as_tuple())
    pr.R1.check(sc.s1)
    pr.R2.check(sc.s2)
    pr.C1.check(u1)
    pr.C2.check(u2)
    pr.B1.check(d1)
    pr.B2.check(d2)
    pr.f.marginals("f", *vars.as_tuple())
    pr.g.marginals("g", *vars.as_tuple())


def marginals(sc: Scenario, vars: DecisionVars) -> Marginals:
    pr = sc.primitives
    u1, u2, d1, d2 = _arguments(sc, *vars.as_tuple())
    C1, C2, B1, B2 = pr.C1.marginal(u1), pr.C2.marginal(u2), pr.B1.marginal(d1), pr.B2.marginal(d2)
    return Marginals(C1, C2, B1, B2)


def _profit_components(sc: Scenario, x1, x2, y):
    pr = sc.primitives
    u1, u2, d1, d2 = _arguments(sc, x1, x2, y)
    base1 = pr.R1.value(sc.s1) - pr.C1.value(u1) - pr.B1.value(d1)
    base2 = pr.R2.value(sc.s2) - pr.C2.value(u2) - pr.B2.value(d2)
    return base1 + x1 - x2 - y, base2 - x1 + x2 + y


def net_profits(sc: Scenario, vars: DecisionVars) -> tuple[float, float]:
    """After-tax profits (pi1, pi2) of the two affiliates."""
    check_validity(sc, vars)
    pre1, pre2 = _profit_components(sc, *vars.as_tuple())
    return (1.0 - sc.taxes.t1) * pre1, (1.0 - sc.taxes.t2) * pre2


def raw_lagrangian(sc: Scenario, x1, x2, y, lam):
    """Lagrangian without validity checks; accepts numpy arrays elementwise."""
    t1, t2 = sc.taxes.t1, sc.taxes.t2
    pr = sc.primitives
    pre1, pre2 = _profit_components(sc, x1, x2, y)
    f = pr.f.cost_at((-x1, x2, y))
    g = pr.g.cost_at((x1, -x2, -y))
    total = (1.0 - t1) * pre1 + (1.0 - t2) * pre2 - f - g
    ybar = sc.ybar
    if ybar is not None:
        total = total - lam * t1 * (y - ybar)
    return total


def raw_objective(sc: Scenario, x1, x2, y):
    """Lagrangian with the branch-consistent indicator (lam = 1 iff y >= ybar)."""
    ybar = sc.ybar
    if ybar is None:
        return raw_lagrangian(sc, x1, x2, y, 0.0)
    return raw_lagrangian(sc, x1, x2, y, np.where(np.asarray(y) >= ybar, 1.0, 0.0))


def _check_lambda(sc: Scenario, lam: int) -> None:
    if lam not in (0, 1):
        raise InvalidParameters(f"lambda must be 0 or 1, got {lam}")
    if lam == 1 and sc.thin_cap is None:
        raise MissingThinCap("lambda = 1 requires a thin-cap rule")


def lagrangian(sc: Scenario, vars: DecisionVars, lam: int = 0) -> float:
    """pi1 + pi2 - f - g - lam*t1*(y - ybar)."""
    _check_lambda(sc, lam)
    check_validity(sc, vars)
    return float(raw_lagrangian(sc, *vars.as_tuple(), lam))


def objective(sc: Scenario, vars: DecisionVars) -> float:
    """The firm's true (piecewise) objective with the indicator set by y vs ybar."""
    check_validity(sc, vars)
    return float(raw_objective(sc, *vars.as_tuple()))


def foc_residuals(sc: Scenario, vars: DecisionVars, lam: int = 0) -> tuple[float, float, float]:
    """Partial derivatives (L1, L2, Ly) of the Lagrangian."""
    _check_lambda(sc, lam)
    check_validity(sc, vars)
    t1, t2 = sc.taxes.t1, sc.taxes.t2
    T = t1 - t2
    m = marginals(sc, vars)
    pr = sc.primitives
    f1, f2, fy = pr.f.marginals("f", *vars.as_tuple())
    g1, g2, gy = pr.g.marginals("g", *vars.as_tuple())
    Cp = (1.0 - t1) * m.C1 - (1.0 - t2) * m.C2
    Bp = (1.0 - t1) * m.B1 - (1.0 - t2) * m.B2
    L1 = -T - Cp / sc.p1 + f1 - g1
    L2 = T + Cp / sc.p2 - f2 + g2
    Ly = T + Bp / sc.r - fy + gy - lam * t1
    return L1, L2, Ly


def second_order(
    sc: Scenario, vars: Optional[DecisionVars] = None, check_signs: bool = True
) -> SecondOrderStructure:
    """Second derivatives of the Lagrangian.

    With quadratic forms these do not depend on the evaluation point; ``vars``
    is only used to confirm the point is inside the validity region.
    """
    if vars is not None:
        check_validity(sc, vars)
    t1, t2 = sc.taxes.t1, sc.taxes.t2
    pr = sc.primitives
    Cpp = (1.0 - t1) * pr.C1.c2 + (1.0 - t2) * pr.C2.c2
    Bpp = (1.0 - t1) * pr.B1.beta2 + (1.0 - t2) * pr.B2.beta2
    Kf, Kg = pr.f.K, pr.g.K
    p1, p2, r = sc.p1, sc.p2, sc.r
    sos = SecondOrderStructure(
        L11=-Cpp / p1**2 - Kf[0][0] - Kg[0][0],
        L22=-Cpp / p2**2 - Kf[1][1] - Kg[1][1],
        Lyy=-Bpp / r**2 - Kf[2][2] - Kg[2][2],
        L12=Cpp / (p1 * p2) + Kf[0][1] + Kg[0][1],
        L1y=Kf[0][2] + Kg[0][2],
        L2y=-(Kf[1][2] + Kg[1][2]),
        lambda_cross=-t1,
    )
    if check_signs:
        check_sign_pattern(sos)
    return sos


def check_sign_pattern(sos: SecondOrderStructure) -> None:
    for name in ("L11", "L22", "Lyy"):
        if not getattr(sos, name) < 0:
            raise SignPatternViolation(name, getattr(sos, name), "< 0")
    if not sos.L12 > 0:
        raise SignPatternViolation("L12", sos.L12, "> 0")
    if not sos.L1y >= 0:
        raise SignPatternViolation("L1y", sos.L1y, ">= 0")
    if not sos.L2y <= 0:
        raise SignPatternViolation("L2y", sos.L2y, "<= 0")


def minors(sos: SecondOrderStructure, t1: float) -> MinorSet:
    """Principal, adjacent and bordered minors of the (bordered) Hessian."""
    L11, L22, Lyy = sos.L11, sos.L22, sos.Lyy
    L12, L1y, L2y = sos.L12, sos.L1y, sos.L2y
    M33 = L11 * L22 - L12**2
    detH = (
        L11 * L22 * Lyy
        + 2.0 * L12 * L1y * L2y
        - L11 * L2y**2
        - L22 * L1y**2
        - Lyy * L12**2
    )
    return MinorSet(
        M11=L22 * Lyy - L2y**2,
        M22=L11 * Lyy - L1y**2,
        M33=M33,
        detH=detH,
        Mbar22=-L22 * t1**2,
        Mbar33=-L11 * t1**2,
        detHbar=-M33 * t1**2,
        Mbar14=-t1 * M33,
        M12=Lyy * L12 - L1y * L2y,
        M13=L12 * L2y - L22 * L1y,
        M23=L11 * L2y - L12 * L1y,
    )


def solve_market_sales(
    sc: Scenario, vars: Optional[DecisionVars] = None
) -> tuple[float, float]:
    """Market sales where R_c'(s) = C_c'(s + q_c - q_-c) for each affiliate."""
    pr = sc.primitives
    q1, q2 = (0.0, 0.0) if vars is None else vars.quantities(sc)[:2]
    out = []
    for R, C, delta in ((pr.R1, pr.C1, q1 - q2), (pr.R2, pr.C2, q2 - q1)):
        s = (R.a - C.c1 - C.c2 * delta) / (R.b + C.c2)
        if s < 0 or not R.marginal(s) > 0 or not C.marginal(s + delta) > 0:
            raise NoInteriorSolution(f"stationary sales {s:.6g} outside the validity region")
        out.append(s)
    return out[0], out[1]


def alp_conditions(
    p1: float, p2: float, r: float, m: Marginals, tol: float = CONDITION_TOL
) -> ConditionRegime:
    return ConditionRegime(
        p1=p1,
        p2=p2,
        r=r,
        marginals=m,
        cost_plus_1=_le(m.C1, p1, tol),
        cost_plus_2=_le(m.C2, p2, tol),
        resale_price_1=_le(p2, m.C1, tol),
        resale_price_2=_le(p1, m.C2, tol),
        cost_of_funds=_le(m.B2, r, tol) and _le(r, m.B1, tol),
        p1_le_p2=_le(p1, p2, tol),
        p2_le_p1=_le(p2, p1, tol),
    )


def check_alp_conditions(sc: Scenario, vars: DecisionVars) -> ConditionRegime:
    """Cost-plus, resale-price and cost-of-funds conditions at ``vars``."""
    check_validity(sc, vars)
    return alp_conditions(sc.p1, sc.p2, sc.r, marginals(sc, vars))


def validity_mask(sc: Scenario, x1, x2, y) -> np.ndarray:
    """Elementwise version of check_validity for lattice evaluation."""
    pr = sc.primitives
    x1, x2, y = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (x1, x2, y)))
    u1, u2, d1, d2 = _arguments(sc, x1, x2, y)
    ok = (x1 >= 0) & (x2 >= 0) & (y >= 0)
    ok &= pr.R1.marginal(sc.s1) > 0
    ok &= pr.R2.marginal(sc.s2) > 0
    ok &= (pr.C1.marginal(u1) > 0) & (pr.C2.marginal(u2) > 0)
    ok &= (pr.B1.marginal(d1) > 0) & (pr.B2.marginal(d2) > 0)
    for spec, v in ((pr.f, (-x1, x2, y)), (pr.g, (x1, -x2, -y))):
        for m in spec._marginals(v):
            ok &= m > 0
    return ok
