from __future__ import annotations

from pathlib import Path

import pytest

from profit_shifting.forms import (
    BankInterestSchedule,
    ConcealmentQuadratic,
    FirmPrimitives,
    QuadraticCost,
    QuadraticRevenue,
    ThinCapRule,
)
from profit_shifting.model import Scenario, TaxRegime
from profit_shifting.runner.config import load_config

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

K_REF = ((1.0, 0.1, 0.2), (0.1, 1.0, 0.15), (0.2, 0.15, 1.0))


def make_scenario(
    t1=0.4, t2=0.2, p1=2.0, p2=3.5, r=0.1, s1=4.0, s2=4.0,
    c1=(1.7, 1.7), c2=(0.2, 0.2), beta1=(0.13, 0.03), beta2=(0.002, 0.002),
    debt=(5.0, 5.0), kappa_f=(1.0, 1.0, 1.0), kappa_g=(1.5, 1.5, 1.5),
    K_f=K_REF, K_g=K_REF, theta=None, floor=0.0,
) -> Scenario:
    pr = FirmPrimitives(
        R1=QuadraticRevenue(10.0, 1.0),
        R2=QuadraticRevenue(10.0, 1.0),
        C1=QuadraticCost(0.0, c1[0], c2[0]),
        C2=QuadraticCost(0.0, c1[1], c2[1]),
        B1=BankInterestSchedule(debt[0], beta1[0], beta2[0]),
        B2=BankInterestSchedule(debt[1], beta1[1], beta2[1]),
        f=ConcealmentQuadratic(kappa_f, K_f),
        g=ConcealmentQuadratic(kappa_g, K_g),
    )
    cap = None if theta is None else ThinCapRule(theta, floor)
    return Scenario(TaxRegime(t1, t2), p1, p2, r, s1, s2, pr, cap)


@pytest.fixture(scope="session")
def reference() -> Scenario:
    return load_config(CONFIGS / "reference.yaml")


@pytest.fixture(scope="session")
def reference_thin_cap() -> Scenario:
    return load_config(CONFIGS / "reference_thin_cap.yaml")


def sweep_details(name: str, n: int | None = None, **changes):
    """Accepted records (with details) of a shipped sweep config."""
    import dataclasses

    from profit_shifting.runner.sweep import run_sweep

    spec = load_config(CONFIGS / name)
    if n is not None:
        changes["max_scenarios"] = n
    spec = dataclasses.replace(spec, **changes)
    return [r for r in run_sweep(spec, keep_details=True)[:-1] if r.accepted]


@pytest.fixture(scope="session")
def corpus():
    out = []
    for name in ("sweep_corpus_unconstrained.yaml", "sweep_corpus_binding.yaml",
                 "sweep_corpus_slack.yaml"):
        out.extend(sweep_details(name, 40))
    return out


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
