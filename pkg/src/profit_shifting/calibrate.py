"""Back out linear coefficients so a chosen point is the firm's optimum.

Random parameter draws rarely land on the price and cost orderings the sign
propositions need, because those orderings are evaluated at the equilibrium.
Calibration inverts the problem: pick the equilibrium (x1*, x2*, y*), the
marginal costs C1', C2' and the marginal bank interest B1', B2' there, then
solve for the cost intercepts c1, the interest slopes beta1, the country-1
concealment intercepts kappa_f and the thin-cap ratio theta. Curvatures are
left untouched, so the optimum is unique and the solver can be checked
against the target.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Literal, Optional

from .errors import InvalidParameters
from .forms import BankInterestSchedule, ConcealmentQuadratic, QuadraticCost, ThinCapRule
from .model import Scenario

CapMode = Literal["none", "slack", "binding"]


@dataclass(frozen=True)
class EquilibriumTargets:
    x1: float
    x2: float
    y: float
    C1: float
    C2: float
    B1: float
    B2: float
    kink: float = 0.5
    cap_usage: float = 0.5

    def __post_init__(self) -> None:
        for name in ("x1", "x2", "y"):
            if not getattr(self, name) >= 0:
                raise InvalidParameters(f"target {name} must be >= 0")
        for name in ("C1", "C2", "B1", "B2"):
            if not getattr(self, name) > 0:
                raise InvalidParameters(f"target {name} must be > 0")
        if not 0.0 < self.kink < 1.0:
            raise InvalidParameters("kink must lie in (0, 1)")
        if not 0.0 < self.cap_usage < 1.0:
            raise InvalidParameters("cap_usage must lie in (0, 1)")


def calibrate(sc: Scenario, targets: EquilibriumTargets, cap: CapMode = "none") -> Scenario:
    """Scenario whose optimum sits at ``targets``.

    ``cap = "slack"`` sets ybar = y*/cap_usage; ``cap = "binding"`` sets
    ybar = y* and places L_y without the penalty at kink * t1, strictly inside
    the kink. Raises InvalidParameters when a backed-out coefficient leaves
    its admissible set.
    """
    pr = sc.primitives
    t1, t2 = sc.taxes.t1, sc.taxes.t2
    T = t1 - t2
    tg = targets
    q1, q2, b = tg.x1 / sc.p1, tg.x2 / sc.p2, tg.y / sc.r

    C1 = QuadraticCost(pr.C1.c0, tg.C1 - pr.C1.c2 * (sc.s1 + q1 - q2), pr.C1.c2)
    C2 = QuadraticCost(pr.C2.c0, tg.C2 - pr.C2.c2 * (sc.s2 + q2 - q1), pr.C2.c2)
    d1 = pr.B1.baseline_debt - b
    d2 = pr.B2.baseline_debt + b
    B1 = BankInterestSchedule(pr.B1.baseline_debt, tg.B1 - pr.B1.beta2 * d1, pr.B1.beta2)
    B2 = BankInterestSchedule(pr.B2.baseline_debt, tg.B2 - pr.B2.beta2 * d2, pr.B2.beta2)

    thin_cap: Optional[ThinCapRule] = None
    lam_shift = 0.0
    if cap != "none":
        ebit = pr.R1.value(sc.s1) - C1.value(sc.s1)
        if not ebit > 0:
            raise InvalidParameters("calibrated uncontrolled EBIT must be > 0")
        ybar = tg.y if cap == "binding" else tg.y / tg.cap_usage
        floor = sc.thin_cap.floor if sc.thin_cap is not None else 0.0
        thin_cap = ThinCapRule(ybar / ebit, floor)
        if cap == "binding":
            lam_shift = tg.kink * t1

    Cp = (1.0 - t1) * tg.C1 - (1.0 - t2) * tg.C2
    Bp = (1.0 - t1) * tg.B1 - (1.0 - t2) * tg.B2
    g1, g2, gy = pr.g.marginals("g", tg.x1, tg.x2, tg.y)
    # Required country-1 marginals (f1, f2, fy) from the three conditions.
    f_req = (T + Cp / sc.p1 + g1, T + Cp / sc.p2 + g2, T + Bp / sc.r + gy - lam_shift)
    v = pr.f.argument("f", tg.x1, tg.x2, tg.y)
    Kv = [sum(pr.f.K[i][j] * v[j] for j in range(3)) for i in range(3)]
    kappa = tuple(f_req[i] - Kv[i] for i in range(3))
    f = ConcealmentQuadratic(kappa, pr.f.K)

    primitives = replace(pr, C1=C1, C2=C2, B1=B1, B2=B2, f=f)
    return replace(sc, primitives=primitives, thin_cap=thin_cap)
