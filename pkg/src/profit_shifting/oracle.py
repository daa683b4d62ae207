"""Independent checks: finite-difference statics by re-solving, and lattice search."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import minimize

from .errors import InvalidParameters, ProfitShiftingError
from .model import DecisionVars, Scenario, raw_objective, validity_mask
from .solver import Equilibrium, solve
from .statics import StaticsReport

DEFAULT_STEP = 1e-4
AGREEMENT_TOL = 1e-3
REL_FLOOR = 1e-8
COMPONENTS = ("x1T", "x2T", "yT")


class BranchCrossing(ProfitShiftingError):
    """A perturbed solve landed on a different branch from the base solve."""


@dataclass(frozen=True)
class OracleReport:
    wrt: str
    step: float
    fd_x1T: float
    fd_x2T: float
    fd_yT: float
    branch_crossing: bool
    rel_errors: Optional[tuple[float, float, float]] = None
    tol: float = AGREEMENT_TOL

    @property
    def fd(self) -> tuple[float, float, float]:
        return (self.fd_x1T, self.fd_x2T, self.fd_yT)

    @property
    def max_rel_err(self) -> Optional[float]:
        return None if self.rel_errors is None else max(self.rel_errors)

    @property
    def verdicts(self) -> Optional[dict[str, bool]]:
        if self.rel_errors is None:
            return None
        return {k: e <= self.tol for k, e in zip(COMPONENTS, self.rel_errors)}

    @property
    def passed(self) -> Optional[bool]:
        v = self.verdicts
        return None if v is None else all(v.values())


def _branch(eq: Equilibrium) -> tuple:
    return (eq.binding, eq.boundary)


def perturbed(sc: Scenario, wrt: str, delta: float) -> Scenario:
    t1, t2 = sc.taxes.t1, sc.taxes.t2
    if wrt == "t1":
        t1 += delta
    elif wrt == "t2":
        t2 += delta
    else:
        raise ValueError(f"wrt must be 't1' or 't2', got {wrt!r}")
    return sc.with_taxes(t1, t2)


def relative_error(fd: float, analytic: float) -> float:
    return abs(fd - analytic) / max(abs(analytic), REL_FLOOR)


def fd_statics(
    sc: Scenario,
    wrt: str,
    step: float = DEFAULT_STEP,
    analytic: Optional[StaticsReport] = None,
    base: Optional[Equilibrium] = None,
    strict: bool = False,
) -> OracleReport:
    """Central differences of (x1*, x2*, y*) in T via re-solves at t_c +/- step.

    Raises InvalidParameters if a perturbed rate leaves [0, 1] or T <= 0.
    """
    base = base or solve(sc)
    try:
        up, down = perturbed(sc, wrt, step), perturbed(sc, wrt, -step)
    except InvalidParameters as exc:
        raise InvalidParameters(f"perturbation by {step:g} is infeasible: {exc}") from exc
    eq_up = solve(up, init=base.vars)
    eq_down = solve(down, init=base.vars)
    sign = 1.0 if wrt == "t1" else -1.0
    fd = [
        sign * (a - b) / (2.0 * step)
        for a, b in zip(eq_up.vars.as_tuple(), eq_down.vars.as_tuple())
    ]
    crossing = not (_branch(eq_up) == _branch(base) == _branch(eq_down))
    if crossing and strict:
        raise BranchCrossing(f"branches {_branch(eq_down)}, {_branch(base)}, {_branch(eq_up)}")
    rel = None
    if analytic is not None and not crossing:
        an = (analytic.x1T, analytic.x2T, analytic.yT)
        rel = tuple(relative_error(f, a) for f, a in zip(fd, an))
    return OracleReport(wrt, step, fd[0], fd[1], fd[2], crossing, rel)


@dataclass(frozen=True)
class GridResult:
    best_vars: DecisionVars
    best_objective: float
    lattice_vars: DecisionVars
    lattice_objective: float
    evaluated: int


Box = tuple[tuple[float, float], tuple[float, float], tuple[float, float]]


def default_box(eq: Equilibrium, scale: float = 2.0) -> Box:
    """Box from 0 to ``scale`` times each equilibrium coordinate (at least 0.1)."""
    return tuple((0.0, scale * max(v, 0.1)) for v in eq.vars.as_tuple())  # type: ignore[return-value]


def _masked_objective(sc: Scenario, x1, x2, y) -> np.ndarray:
    ok = validity_mask(sc, x1, x2, y)
    with np.errstate(invalid="ignore", over="ignore"):
        vals = np.asarray(raw_objective(sc, x1, x2, y), dtype=float)
    return np.where(ok, vals, -np.inf)


def grid_oracle(sc: Scenario, bounds: Box, n: int = 60, refine: bool = True) -> GridResult:
    """Exhaustive lattice search of the true objective, then bounded local refinement."""
    if n < 1 or n**3 > 10**7:
        raise ValueError("lattice size must satisfy 1 <= n and n^3 <= 1e7")
    axes = [np.linspace(lo, hi, n) if hi > lo else np.array([lo]) for lo, hi in bounds]
    X1, X2, Y = np.meshgrid(*axes, indexing="ij")
    vals = _masked_objective(sc, X1, X2, Y)
    idx = np.unravel_index(int(np.argmax(vals)), vals.shape)
    start = np.array([X1[idx], X2[idx], Y[idx]])
    lattice_best = float(vals[idx])
    best, best_val = start, lattice_best
    if refine and np.isfinite(lattice_best) and any(hi > lo for lo, hi in bounds):

        def neg(v: np.ndarray) -> float:
            out = float(_masked_objective(sc, v[0], v[1], v[2]))
            return -out if np.isfinite(out) else 1e300

        res = minimize(
            neg,
            start,
            method="Nelder-Mead",
            bounds=bounds,
            options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 20000, "maxfev": 40000},
        )
        if -res.fun > best_val:
            best, best_val = np.asarray(res.x), float(-res.fun)
    return GridResult(
        best_vars=DecisionVars(*(max(float(v), 0.0) for v in best)),
        best_objective=best_val,
        lattice_vars=DecisionVars(*(float(v) for v in start)),
        lattice_objective=lattice_best,
        evaluated=int(vals.size),
    )
