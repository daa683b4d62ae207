"""Exception hierarchy shared by every layer of the package."""

from __future__ import annotations


class ProfitShiftingError(Exception):
    """Base class for all package errors."""


class InvalidParameters(ProfitShiftingError, ValueError):
    """A constructor received parameters outside its admissible set."""


class OutOfValidityRegion(ProfitShiftingError):
    """A functional form was evaluated where its monotonicity assumption fails."""

    def __init__(self, form: object, point: float, detail: str = "") -> None:
        self.form = form
        self.point = point
        msg = f"{type(form).__name__} evaluated outside its validity region at {point!r}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class MonotonicityViolation(OutOfValidityRegion):
    """A concealment cost has a non-positive marginal at the evaluated point."""


class MissingThinCap(ProfitShiftingError):
    """The binding indicator was requested for a scenario without a thin-cap rule."""


class SignPatternViolation(ProfitShiftingError):
    """A second derivative of the Lagrangian has the wrong sign."""

    def __init__(self, entry: str, value: float, required: str) -> None:
        self.entry = entry
        self.value = value
        self.required = required
        super().__init__(f"{entry} = {value!r} violates required sign {required}")


class NoInteriorSolution(ProfitShiftingError):
    """The stationary market-sales level falls outside the validity region."""


class NonConvergence(ProfitShiftingError):
    def __init__(self, iterations: int, residual: float, detail: str = "") -> None:
        self.iterations = iterations
        self.residual = residual
        msg = f"no convergence after {iterations} iterations (residual {residual:.3e})"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class ExceedsThinCapRegime(ProfitShiftingError):
    """Even with the penalty active the firm wants internal interest above the cap.

    Carries the kink point that was examined so callers can report it.
    """

    def __init__(self, marginal_value: float, equilibrium: object = None) -> None:
        self.marginal_value = marginal_value
        self.equilibrium = equilibrium
        super().__init__(
            f"L_y(lambda=1) = {marginal_value:.6g} > 0 at y = ybar: "
            "optimum lies beyond the thin-cap limit"
        )


class SingularSystem(ProfitShiftingError):
    """The comparative-statics matrix is numerically singular."""


class ConfigError(ProfitShiftingError):
    """Base class for configuration problems."""


class ParseError(ConfigError):
    def __init__(self, line: int | None, message: str) -> None:
        self.line = line
        self.message = message
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{message}")


class ValidationError(ConfigError):
    def __init__(self, field_path: str, constraint: str) -> None:
        self.field_path = field_path
        self.constraint = constraint
        super().__init__(f"{field_path}: {constraint}")


class MixedMuSigns(ProfitShiftingError):
    """The two internal-sales shocks differ in sign, so no sign verdict is possible."""

    def __init__(self, mu1: float, mu2: float, report: object = None) -> None:
        self.mu1 = mu1
        self.mu2 = mu2
        self.report = report
        super().__init__(f"mu1 = {mu1:.6g} and mu2 = {mu2:.6g} differ in sign")


class MonotoneConditionFails(ProfitShiftingError):
    """sign(-(L22*L1y + L11*L2y)) differs from sign(mu1 - mu2); phi_y is undefined."""

    def __init__(self, dominance_term: float, mu_gap: float, report: object = None) -> None:
        self.dominance_term = dominance_term
        self.mu_gap = mu_gap
        self.report = report
        super().__init__(
            f"dominance term {dominance_term:.6g} and mu1 - mu2 = {mu_gap:.6g} differ in sign"
        )
