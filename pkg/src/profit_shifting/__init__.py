"""Two-affiliate profit-shifting model: equilibrium, comparative statics and sign audits."""

from .calibrate import EquilibriumTargets, calibrate
from .forms import (
    BankInterestSchedule,
    ConcealmentQuadratic,
    FirmPrimitives,
    QuadraticCost,
    QuadraticRevenue,
    ThinCapRule,
    concealment_gradient,
    eval_with_derivatives,
    thin_cap_limit,
)
from .model import (
    DecisionVars,
    Scenario,
    TaxRegime,
    check_alp_conditions,
    foc_residuals,
    lagrangian,
    minors,
    net_profits,
    second_order,
    solve_market_sales,
)
from .oracle import OracleReport, fd_statics, grid_oracle
from .solver import Equilibrium, certify, solve
from .statics import (
    StaticsReport,
    audit_propositions,
    lambda_shadow_analysis,
    statics_constrained,
    statics_unconstrained,
)

__all__ = [
    "BankInterestSchedule", "ConcealmentQuadratic", "FirmPrimitives", "QuadraticCost",
    "QuadraticRevenue", "ThinCapRule", "concealment_gradient", "eval_with_derivatives",
    "thin_cap_limit", "DecisionVars", "Scenario", "TaxRegime", "check_alp_conditions",
    "foc_residuals", "lagrangian", "minors", "net_profits", "second_order",
    "solve_market_sales", "OracleReport", "fd_statics", "grid_oracle", "Equilibrium",
    "certify", "solve", "StaticsReport", "audit_propositions", "lambda_shadow_analysis",
    "statics_constrained", "statics_unconstrained", "EquilibriumTargets", "calibrate",
]
