"""Parametric functional forms for revenues, costs, interest and concealment.

Every form is quadratic, so values and derivatives are exact. The model's
qualitative assumptions (increasing revenue and costs, convexity, increasing
concealment costs) only hold on a bounded region for quadratics; evaluation
outside that region raises instead of returning a number.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Literal, Protocol

import numpy as np

from .errors import InvalidParameters, MonotonicityViolation, OutOfValidityRegion

Orientation = Literal["f", "g"]

# Signs mapping (x1, x2, y) to the concealment-cost argument vector.
ORIENTATION_SIGNS: dict[str, tuple[float, float, float]] = {
    "f": (-1.0, 1.0, 1.0),
    "g": (1.0, -1.0, -1.0),
}

PSD_TOL = 1e-12


class ScalarForm(Protocol):
    def evaluate(self, point: float) -> tuple[float, float, float]: ...


@dataclass(frozen=True)
class QuadraticRevenue:
    """R(s) = a*s - b*s^2/2 with R(0) = 0 and R'' = -b."""

    a: float
    b: float

    def __post_init__(self) -> None:
        if not self.a > 0:
            raise InvalidParameters(f"revenue intercept a must be > 0, got {self.a}")
        if not self.b > 0:
            raise InvalidParameters(f"revenue slope b must be > 0, got {self.b}")

    def value(self, s: float) -> float:
        return self.a * s - 0.5 * self.b * s * s

    def marginal(self, s: float) -> float:
        return self.a - self.b * s

    def check(self, s: float) -> None:
        if not self.marginal(s) > 0:
            raise OutOfValidityRegion(self, s, f"R'(s) = {self.marginal(s):.6g} <= 0")

    def evaluate(self, s: float) -> tuple[float, float, float]:
        self.check(s)
        return self.value(s), self.marginal(s), -self.b


@dataclass(frozen=True)
class QuadraticCost:
    """C(u) = c0 + c1*u + c2*u^2/2 evaluated at total output u."""

    c0: float
    c1: float
    c2: float

    def __post_init__(self) -> None:
        if not self.c0 >= 0:
            raise InvalidParameters(f"fixed cost c0 must be >= 0, got {self.c0}")
        if not self.c1 > 0:
            raise InvalidParameters(f"cost slope c1 must be > 0, got {self.c1}")
        if not self.c2 > 0:
            raise InvalidParameters(f"cost curvature c2 must be > 0, got {self.c2}")

    def value(self, u: float) -> float:
        return self.c0 + self.c1 * u + 0.5 * self.c2 * u * u

    def marginal(self, u: float) -> float:
        return self.c1 + self.c2 * u

    def check(self, u: float) -> None:
        if not self.marginal(u) > 0:
            raise OutOfValidityRegion(self, u, f"C'(u) = {self.marginal(u):.6g} <= 0")

    def evaluate(self, u: float) -> tuple[float, float, float]:
        self.check(u)
        return self.value(u), self.marginal(u), self.c2


@dataclass(frozen=True)
class BankInterestSchedule:
    """Interest paid to banks, B(d) = beta1*d + beta2*d^2/2, at net bank debt d.

    ``baseline_debt`` is the bank debt held before any internal loan; the
    borrowing affiliate evaluates at ``baseline_debt - b`` and the lender at
    ``baseline_debt + b``.
    """

    baseline_debt: float
    beta1: float
    beta2: float

    def __post_init__(self) -> None:
        if not self.baseline_debt >= 0:
            raise InvalidParameters(f"baseline_debt must be >= 0, got {self.baseline_debt}")
        if not self.beta1 > 0:
            raise InvalidParameters(f"beta1 must be > 0, got {self.beta1}")
        if not self.beta2 >= 0:
            raise InvalidParameters(f"beta2 must be >= 0, got {self.beta2}")

    def value(self, d: float) -> float:
        return self.beta1 * d + 0.5 * self.beta2 * d * d

    def marginal(self, d: float) -> float:
        return self.beta1 + self.beta2 * d

    def check(self, d: float) -> None:
        if not self.marginal(d) > 0:
            raise OutOfValidityRegion(self, d, f"B'(d) = {self.marginal(d):.6g} <= 0")

    def evaluate(self, d: float) -> tuple[float, float, float]:
        self.check(d)
        return self.value(d), self.marginal(d), self.beta2


def _is_psd(K: np.ndarray, tol: float = PSD_TOL) -> bool:
    # All principal minors, not only the leading ones: diag(0, -1, 0) has
    # non-negative leading minors but is indefinite.
    n = K.shape[0]
    for size in range(1, n + 1):
        for idx in combinations(range(n), size):
            if np.linalg.det(K[np.ix_(idx, idx)]) < -tol:
                return False
    return True


@dataclass(frozen=True)
class ConcealmentQuadratic:
    """Concealment cost kappa.v + v'Kv/2 over a signed argument vector v.

    For the country-1 cost f the argument is (-x1, x2, y); for the country-2
    cost g it is (x1, -x2, -y). ``kappa`` is the marginal cost at the origin.
    """

    kappa: tuple[float, float, float]
    K: tuple[tuple[float, float, float], ...] = field(
        default=((0.0, 0.0, 0.0), (0.0, 0.0, 0.0), (0.0, 0.0, 0.0))
    )

    def __post_init__(self) -> None:
        kappa = tuple(float(k) for k in self.kappa)
        if len(kappa) != 3:
            raise InvalidParameters("kappa must have 3 entries")
        if not all(k > 0 for k in kappa):
            raise InvalidParameters(f"kappa entries must be > 0, got {kappa}")
        K = np.asarray(self.K, dtype=float)
        if K.shape != (3, 3):
            raise InvalidParameters(f"K must be 3x3, got shape {K.shape}")
        if not np.array_equal(K, K.T):
            raise InvalidParameters("K must be symmetric")
        off = K[~np.eye(3, dtype=bool)]
        if np.any(off < 0):
            raise InvalidParameters("K off-diagonal entries must be >= 0")
        if not _is_psd(K):
            raise InvalidParameters("K must be positive semidefinite")
        object.__setattr__(self, "kappa", kappa)
        object.__setattr__(self, "K", tuple(tuple(float(v) for v in row) for row in K))

    def argument(self, orientation: Orientation, x1: float, x2: float, y: float):
        s = ORIENTATION_SIGNS[orientation]
        return (s[0] * x1, s[1] * x2, s[2] * y)

    def _marginals(self, v) -> tuple[float, float, float]:
        K, k = self.K, self.kappa
        return tuple(k[i] + K[i][0] * v[0] + K[i][1] * v[1] + K[i][2] * v[2] for i in range(3))

    def cost_at(self, v) -> float:
        K = self.K
        quad = sum(v[i] * K[i][j] * v[j] for i in range(3) for j in range(3))
        return sum(self.kappa[i] * v[i] for i in range(3)) + 0.5 * quad

    def cost(self, orientation: Orientation, x1: float, x2: float, y: float) -> float:
        return self.cost_at(self.argument(orientation, x1, x2, y))

    def marginals(self, orientation: Orientation, x1: float, x2: float, y: float):
        """Indexed derivatives (f1, f2, fy): partials w.r.t. the signed arguments.

        Raises MonotonicityViolation unless all three are strictly positive.
        """
        v = self.argument(orientation, x1, x2, y)
        m = self._marginals(v)
        if not all(mi > 0 for mi in m):
            raise MonotonicityViolation(
                self, (x1, x2, y), f"{orientation}-marginals {m} not all > 0"
            )
        return m

    def raw_gradient(self, orientation: Orientation, x1: float, x2: float, y: float):
        """Gradient w.r.t. (x1, x2, y) without the monotonicity check."""
        s = ORIENTATION_SIGNS[orientation]
        m = self._marginals(self.argument(orientation, x1, x2, y))
        return (s[0] * m[0], s[1] * m[1], s[2] * m[2])


def concealment_gradient(
    spec: ConcealmentQuadratic, orientation: Orientation, x1: float, x2: float, y: float
) -> tuple[float, float, float]:
    """(d/dx1, d/dx2, d/dy) of the chosen concealment cost.

    For ``f`` the result is (-f1, f2, fy); for ``g`` it is (g1, -g2, -gy), with
    every indexed derivative strictly positive.
    """
    spec.marginals(orientation, x1, x2, y)
    return spec.raw_gradient(orientation, x1, x2, y)


@dataclass(frozen=True)
class ThinCapRule:
    """Earnings-stripping cap: internal interest up to theta times uncontrolled EBIT."""

    theta: float
    floor: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.theta <= 1.0:
            raise InvalidParameters(f"theta must lie in [0, 1], got {self.theta}")
        if not self.floor >= 0:
            raise InvalidParameters(f"floor must be >= 0, got {self.floor}")

    def limit_from_ebit(self, ebit: float) -> float:
        return self.theta * max(self.floor, ebit)


def thin_cap_limit(
    rule: ThinCapRule, R1: QuadraticRevenue, C1: QuadraticCost, s1: float
) -> float:
    """ybar computed from affiliate 1's market sales alone."""
    rev, _, _ = R1.evaluate(s1)
    cost, _, _ = C1.evaluate(s1)
    return rule.limit_from_ebit(rev - cost)


def eval_with_derivatives(form: ScalarForm, point: float) -> tuple[float, float, float]:
    """(value, first derivative, second derivative) of any scalar form."""
    return form.evaluate(point)


@dataclass(frozen=True)
class FirmPrimitives:
    R1: QuadraticRevenue
    R2: QuadraticRevenue
    C1: QuadraticCost
    C2: QuadraticCost
    B1: BankInterestSchedule
    B2: BankInterestSchedule
    f: ConcealmentQuadratic
    g: ConcealmentQuadratic
