"""Damped Newton solver for the firm's optimum with thin-cap branch logic.

The firm's true objective is the Lagrangian with lam = 1 exactly when
y >= ybar. It is continuous, with a downward kink in the y-slope of size t1
at ybar. The solver first ignores the penalty (branch A). If that optimum
respects the cap it is returned as a slack equilibrium; otherwise y is
pinned at ybar and the remaining two conditions are solved (branch B).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ExceedsThinCapRegime, NonConvergence, OutOfValidityRegion
from .model import (
    DecisionVars,
    MinorSet,
    Scenario,
    SecondOrderStructure,
    foc_residuals,
    lagrangian,
    minors,
    objective,
    second_order,
)

FOC_TOL = 1e-9
BINDING_TOL = 1e-9
MAX_ITER = 200
MAX_HALVINGS = 40
ARMIJO = 1e-4
PIN_ITERATIONS = 2

VAR_NAMES = ("x1", "x2", "y")


@dataclass(frozen=True)
class Equilibrium:
    vars: DecisionVars
    lambda_star: int
    binding: bool
    foc_norm: float
    minors: MinorSet
    objective: float
    iterations: int
    sos: SecondOrderStructure
    ybar: Optional[float] = None
    boundary: tuple[str, ...] = ()

    @property
    def interior(self) -> bool:
        return not self.boundary


@dataclass(frozen=True)
class MinorCheck:
    name: str
    value: float
    required: str
    ok: bool


@dataclass(frozen=True)
class CertificateReport:
    branch: str
    checks: tuple[MinorCheck, ...]
    identity_error: Optional[float] = None

    @property
    def passed(self) -> bool:
        return all(c.ok for c in self.checks)

    def failures(self) -> list[str]:
        return [c.name for c in self.checks if not c.ok]


def _lagr(sc: Scenario, x: np.ndarray, lam: int) -> float:
    return lagrangian(sc, DecisionVars(*(float(v) for v in x)), lam)


def _grad(sc: Scenario, x: np.ndarray, lam: int) -> np.ndarray:
    return np.array(foc_residuals(sc, DecisionVars(*(float(v) for v in x)), lam))


def _newton(
    sc: Scenario,
    x0: np.ndarray,
    lam: int,
    fixed: frozenset[int],
    max_iter: int,
    tol: float,
) -> tuple[np.ndarray, int, float, frozenset[int]]:
    """Maximize the lam-Lagrangian over coordinates not in ``fixed``.

    Returns the point, iteration count, final residual norm and the set of
    coordinates held at zero by the active-set rule.
    """
    H = second_order(sc).hessian()
    x = np.array(x0, dtype=float)
    held: set[int] = set()
    pinned_count = [0, 0, 0]
    value = _lagr(sc, x, lam)
    residual = np.inf
    for it in range(max_iter + 1):
        g = _grad(sc, x, lam)
        # Release held coordinates whose gradient points into the interior.
        for i in list(held):
            if g[i] > tol:
                held.discard(i)
                pinned_count[i] = 0
        free = [i for i in range(3) if i not in fixed and i not in held]
        res_free = max((abs(g[i]) for i in free), default=0.0)
        res_held = max((max(g[i], 0.0) for i in held), default=0.0)
        residual = max(res_free, res_held)
        if residual <= tol:
            return x, it, residual, frozenset(held)
        if it == max_iter:
            break
        d = np.zeros(3)
        if free:
            Hf = H[np.ix_(free, free)]
            d[free] = np.linalg.solve(Hf, -g[free])
        alpha = 1.0
        accepted = False
        for _ in range(MAX_HALVINGS + 1):
            cand = np.maximum(x + alpha * d, 0.0)
            cand[list(fixed)] = x[list(fixed)]
            try:
                cand_value = _lagr(sc, cand, lam)
            except OutOfValidityRegion:
                alpha *= 0.5
                continue
            if cand_value >= value + ARMIJO * float(g @ (cand - x)):
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            raise NonConvergence(it, residual, "line search failed")
        x, value = cand, cand_value
        for i in free:
            if x[i] == 0.0 and d[i] < 0:
                pinned_count[i] += 1
                if pinned_count[i] >= PIN_ITERATIONS:
                    held.add(i)
            else:
                pinned_count[i] = 0
    raise NonConvergence(max_iter, residual)


def default_init(sc: Scenario) -> DecisionVars:
    x = 0.1 * sc.p1
    ybar = sc.ybar
    y = min(0.1, ybar / 2.0) if ybar is not None else 0.1
    return DecisionVars(x, x, y)


def _build(
    sc: Scenario, x: np.ndarray, lam: int, binding: bool, iterations: int, resid: float,
    held: frozenset[int], ybar: Optional[float],
) -> Equilibrium:
    vars = DecisionVars(*(float(v) for v in x))
    sos = second_order(sc, vars)
    return Equilibrium(
        vars=vars,
        lambda_star=lam,
        binding=binding,
        foc_norm=float(resid),
        minors=minors(sos, sc.taxes.t1),
        objective=objective(sc, vars),
        iterations=iterations,
        sos=sos,
        ybar=ybar,
        boundary=tuple(VAR_NAMES[i] for i in sorted(held)),
    )


def solve(
    sc: Scenario,
    init: Optional[DecisionVars] = None,
    max_iter: int = MAX_ITER,
    tol: float = FOC_TOL,
) -> Equilibrium:
    """Locate the firm's optimum (x1*, x2*, y*, lam*)."""
    x0 = np.array((init or default_init(sc)).as_tuple())
    ybar = sc.ybar
    # Branch A: penalty off.
    xa, it_a, res_a, held_a = _newton(sc, x0, 0, frozenset(), max_iter, tol)
    if ybar is None or xa[2] < ybar - BINDING_TOL:
        return _build(sc, xa, 0, False, it_a, res_a, held_a, ybar)
    # Branch B: y pinned at the cap, penalty on.
    xb0 = xa.copy()
    xb0[2] = ybar
    xb, it_b, res_b, held_b = _newton(sc, xb0, 1, frozenset({2}), max_iter, tol)
    eq = _build(sc, xb, 1, True, it_a + it_b, res_b, held_b, ybar)
    ly_on = _grad(sc, xb, 1)[2]
    if ly_on > tol:
        raise ExceedsThinCapRegime(float(ly_on), eq)
    return eq


def kink_marginals(sc: Scenario, eq: Equilibrium) -> tuple[float, float]:
    """L_y with the penalty off and on at the equilibrium point."""
    x = np.array(eq.vars.as_tuple())
    return float(_grad(sc, x, 0)[2]), float(_grad(sc, x, 1)[2])


def certify(eq: Equilibrium, sc: Scenario) -> CertificateReport:
    """Second-order minor tests appropriate to the equilibrium's branch."""
    m = eq.minors
    if not eq.binding:
        checks = (
            MinorCheck("M11", m.M11, "> 0", m.M11 > 0),
            MinorCheck("M22", m.M22, "> 0", m.M22 > 0),
            MinorCheck("M33", m.M33, "> 0", m.M33 > 0),
            MinorCheck("detH", m.detH, "< 0", m.detH < 0),
        )
        return CertificateReport("slack", checks)
    generic = float(np.linalg.det(eq.sos.bordered_hessian()))
    scale = max(abs(m.detHbar), abs(generic), np.finfo(float).tiny)
    ident = abs(generic - m.detHbar) / scale
    checks = (
        MinorCheck("Mbar22", m.Mbar22, "> 0", m.Mbar22 > 0),
        MinorCheck("Mbar33", m.Mbar33, "> 0", m.Mbar33 > 0),
        MinorCheck("detHbar", m.detHbar, "< 0", m.detHbar < 0),
        MinorCheck("detHbar identity", ident, "<= 1e-12", ident <= 1e-12),
    )
    return CertificateReport("binding", checks, identity_error=ident)
