"""Batch pipeline: generate scenarios, then solve, certify, differentiate, check and audit."""

from __future__ import annotations

import copy
import itertools
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Iterator, Optional

from ..calibrate import calibrate
from ..errors import (
    ConfigError,
    InvalidParameters,
    NonConvergence,
    OutOfValidityRegion,
    ProfitShiftingError,
)
from ..model import Scenario
from ..oracle import GridResult, OracleReport, default_box, fd_statics, grid_oracle
from ..solver import CertificateReport, Equilibrium, certify, solve
from ..statics import (
    PROPOSITIONS,
    PropositionVerdict,
    ShadowVerdict,
    StaticsReport,
    audit_propositions,
    lambda_shadow_analysis,
    statics,
)
from .config import SweepSpec, flatten, make_targets, scenario_from_mapping, scenario_to_mapping, set_path

SCHEMA_VERSION = "1"
WRTS = ("t1", "t2")
STATUSES = ("ok", "rejected-regime", "nonconverged", "branch-crossing")

EQUILIBRIUM_COLUMNS = (
    "x1", "x2", "y", "lambda_star", "binding", "ybar", "foc_norm",
    "objective", "iterations", "boundary", "certificate", "grid_gap",
)
STATICS_COLUMNS = (
    "x1T", "x2T", "yT", "lambdaT", "sum_xT", "phi_x", "phi_y", "phi_lambda",
    "phi_lambda_weighted", "interior_value", "z_plus", "lambda1", "mixed_mu_signs",
    "monotone_condition", "dominance", "assumptions", "shadow_consistent",
    "fd_x1T", "fd_x2T", "fd_yT", "fd_max_rel_err", "fd_branch_crossing", "fd_pass",
)


def _scenario_columns() -> tuple[str, ...]:
    from ..forms import (
        BankInterestSchedule, ConcealmentQuadratic, FirmPrimitives,
        QuadraticCost, QuadraticRevenue, ThinCapRule,
    )
    from ..model import TaxRegime

    R, C = QuadraticRevenue(1, 1), QuadraticCost(0, 1, 1)
    B, F = BankInterestSchedule(0, 1, 0), ConcealmentQuadratic((1, 1, 1))
    sc = Scenario(TaxRegime(0.5, 0.1), 1, 1, 1, 0, 0, FirmPrimitives(R, R, C, C, B, B, F, F), ThinCapRule(0))
    return tuple(flatten(scenario_to_mapping(sc)))


SCENARIO_COLUMNS = _scenario_columns()
COLUMNS = (
    ("schema_version", "scenario_id", "status", "reason")
    + SCENARIO_COLUMNS
    + EQUILIBRIUM_COLUMNS
    + tuple(f"{w}.{c}" for w in WRTS for c in STATICS_COLUMNS)
    + tuple(f"prop.{p}.{w}" for p in PROPOSITIONS for w in WRTS)
)


@dataclass
class ScenarioDetails:
    """In-memory objects behind a record, kept for programmatic checks."""

    scenario: Optional[Scenario] = None
    equilibrium: Optional[Equilibrium] = None
    certificate: Optional[CertificateReport] = None
    reports: dict[str, StaticsReport] = field(default_factory=dict)
    shadows: dict[str, ShadowVerdict] = field(default_factory=dict)
    verdicts: dict[str, list[PropositionVerdict]] = field(default_factory=dict)
    oracles: dict[str, OracleReport] = field(default_factory=dict)
    grid: Optional[GridResult] = None


@dataclass
class RunRecord:
    scenario_id: str
    status: str
    values: dict[str, Any]
    details: Optional[ScenarioDetails] = field(default=None, compare=False, repr=False)

    @property
    def accepted(self) -> bool:
        return self.status in ("ok", "branch-crossing")


def _blank(scenario_id: str, status: str, reason: str) -> dict[str, Any]:
    values: dict[str, Any] = {c: None for c in COLUMNS}
    values.update(schema_version=SCHEMA_VERSION, scenario_id=scenario_id, status=status, reason=reason)
    return values


def _verdict_cell(v: PropositionVerdict) -> str:
    if not v.applicable:
        return "n/a"
    return "pass" if v.passed else "fail"


def candidates(spec: SweepSpec) -> Iterator[dict[str, float]]:
    """Parameter overrides in generation order; deterministic in the seed."""
    if not spec.random:
        paths = [p for p, _ in spec.varied]
        for combo in itertools.product(*(d.values for _, d in spec.varied)):
            yield dict(zip(paths, combo))
        return
    rng = random.Random(spec.seed)
    while True:
        yield {p: d.draw(rng) for p, d in spec.varied}


def build_scenario(spec: SweepSpec, overrides: dict[str, float]) -> Scenario:
    """Apply overrides to the base mapping and run the optional calibration."""
    m = copy.deepcopy(spec.base_mapping)
    cal = spec.calibration
    targets = dict(cal.targets) if cal is not None else {}
    for path, value in overrides.items():
        if path.startswith("targets."):
            targets[path.split(".", 1)[1]] = value
        else:
            set_path(m, path, value)
    if cal is not None and cal.mode == "full_equality":
        p = m["prices"]["p1"]
        m["prices"]["p2"] = p
        targets["C1"] = targets["C2"] = p
    sc = scenario_from_mapping(m)
    if cal is None:
        return sc
    return calibrate(sc, make_targets(targets), cal.cap)


def evaluate(sc: Scenario, spec: SweepSpec, scenario_id: str, keep: bool = False) -> RunRecord:
    """Full pipeline for one scenario; failures become the record status."""
    values = _blank(scenario_id, "ok", "")
    details = ScenarioDetails(scenario=sc) if keep else None
    flat = flatten(scenario_to_mapping(sc))
    for k in SCENARIO_COLUMNS:
        values[k] = flat.get(k)

    def finish(status: str, reason: str) -> RunRecord:
        values["status"], values["reason"] = status, reason
        return RunRecord(scenario_id, status, values, details)

    try:
        eq = solve(sc)
    except NonConvergence as exc:
        return finish("nonconverged", str(exc))
    except ProfitShiftingError as exc:
        return finish("rejected-regime", f"{type(exc).__name__}: {exc}")
    cert = certify(eq, sc)
    values.update(
        x1=eq.vars.x1, x2=eq.vars.x2, y=eq.vars.y, lambda_star=eq.lambda_star,
        binding=eq.binding, ybar=eq.ybar, foc_norm=eq.foc_norm, objective=eq.objective,
        iterations=eq.iterations, boundary=";".join(eq.boundary),
        certificate="pass" if cert.passed else "fail",
    )
    if details is not None:
        details.equilibrium, details.certificate = eq, cert

    reports: dict[str, StaticsReport] = {}
    for w in WRTS:
        try:
            rep = statics(eq, sc, w)
        except ProfitShiftingError as exc:
            return finish("rejected-regime", f"{type(exc).__name__}: {exc}")
        reports[w] = rep
        verdicts = audit_propositions(rep)
        values.update({
            f"{w}.x1T": rep.x1T, f"{w}.x2T": rep.x2T, f"{w}.yT": rep.yT,
            f"{w}.lambdaT": rep.lambdaT, f"{w}.sum_xT": rep.sum_xT,
            f"{w}.phi_x": rep.phi_x, f"{w}.phi_y": rep.phi_y,
            f"{w}.phi_lambda": rep.phi_lambda, f"{w}.phi_lambda_weighted": rep.phi_lambda_weighted,
            f"{w}.interior_value": rep.interior_value, f"{w}.z_plus": rep.z_plus,
            f"{w}.lambda1": rep.lambda1, f"{w}.mixed_mu_signs": rep.mixed_mu_signs,
            f"{w}.monotone_condition": rep.monotone_condition, f"{w}.dominance": rep.dominance,
            f"{w}.assumptions": ";".join(rep.assumption_failures) or "ok",
        })
        for v in verdicts:
            values[f"prop.{v.name}.{w}"] = _verdict_cell(v)
        if rep.constrained:
            shadow = lambda_shadow_analysis(eq, sc, rep)
            values[f"{w}.shadow_consistent"] = shadow.consistent
            if details is not None:
                details.shadows[w] = shadow
        if details is not None:
            details.reports[w], details.verdicts[w] = rep, verdicts

    if spec.premise_filter is not None:
        name = spec.premise_filter
        if not any(values[f"prop.{name}.{w}"] != "n/a" for w in WRTS):
            return finish("rejected-regime", f"premise {name} not met")

    status = "ok"
    if spec.oracle.fd:
        for w in WRTS:
            try:
                o = fd_statics(sc, w, spec.oracle.step, analytic=reports[w], base=eq)
            except NonConvergence as exc:
                return finish("nonconverged", f"oracle: {exc}")
            except ProfitShiftingError as exc:
                return finish("rejected-regime", f"oracle: {type(exc).__name__}: {exc}")
            values.update({
                f"{w}.fd_x1T": o.fd_x1T, f"{w}.fd_x2T": o.fd_x2T, f"{w}.fd_yT": o.fd_yT,
                f"{w}.fd_max_rel_err": o.max_rel_err, f"{w}.fd_branch_crossing": o.branch_crossing,
                f"{w}.fd_pass": o.passed,
            })
            if o.branch_crossing:
                status = "branch-crossing"
            if details is not None:
                details.oracles[w] = o
    if spec.oracle.grid:
        g = grid_oracle(sc, default_box(eq), spec.oracle.grid_n)
        values["grid_gap"] = g.best_objective - eq.objective
        if details is not None:
            details.grid = g
    return finish(status, "")


def _attempt(args: tuple[SweepSpec, dict[str, float], str, bool]) -> RunRecord:
    spec, overrides, sid, keep = args
    try:
        sc = build_scenario(spec, overrides)
    except (ConfigError, InvalidParameters, OutOfValidityRegion) as exc:
        values = _blank(sid, "rejected-regime", f"invalid parameters: {exc}")
        for k, v in overrides.items():
            if k in values:
                values[k] = v
        return RunRecord(sid, "rejected-regime", values, ScenarioDetails() if keep else None)
    return evaluate(sc, spec, sid, keep)


def summary_record(records: list[RunRecord], attempted: int) -> RunRecord:
    counts = {s: sum(r.status == s for r in records) for s in STATUSES}
    accepted = counts["ok"] + counts["branch-crossing"]
    reason = f"attempted={attempted} accepted={accepted} " + " ".join(
        f"{s}={counts[s]}" for s in STATUSES
    )
    values = _blank("summary", "summary", reason)
    certs = [r.values["certificate"] for r in records if r.values.get("certificate")]
    values["certificate"] = f"{certs.count('pass')}/{len(certs)}"
    for w in WRTS:
        fds = [r.values[f"{w}.fd_pass"] for r in records if r.values.get(f"{w}.fd_pass") is not None]
        values[f"{w}.fd_pass"] = f"{sum(bool(v) for v in fds)}/{len(fds)}"
        for p in PROPOSITIONS:
            key = f"prop.{p}.{w}"
            cells = [r.values[key] for r in records if r.accepted and r.values.get(key) in ("pass", "fail")]
            values[key] = f"{cells.count('pass')}/{len(cells)}"
    return RunRecord("summary", "summary", values)


def run_sweep(spec: SweepSpec, keep_details: bool = False) -> list[RunRecord]:
    """Evaluate generated scenarios until ``max_scenarios`` are accepted.

    Random sweeps stop after ``oversampling * max_scenarios`` attempts.
    Grid and value-list sweeps enumerate the full product truncated at
    ``max_scenarios`` attempts. The last record is an aggregate summary.
    """
    limit = spec.max_scenarios * spec.oversampling if spec.random else spec.max_scenarios
    gen = candidates(spec)
    records: list[RunRecord] = []
    accepted = 0
    attempted = 0
    width = max(1, spec.workers) * 8
    pool = ProcessPoolExecutor(spec.workers) if spec.workers > 1 else None
    try:
        while attempted < limit and (not spec.random or accepted < spec.max_scenarios):
            batch = []
            for overrides in itertools.islice(gen, min(width, limit - attempted)):
                batch.append((spec, overrides, f"s{attempted + len(batch):06d}", keep_details))
            if not batch:
                break
            results = pool.map(_attempt, batch) if pool is not None else map(_attempt, batch)
            for rec in results:
                if spec.random and accepted >= spec.max_scenarios:
                    break
                records.append(rec)
                attempted += 1
                accepted += rec.accepted
    finally:
        if pool is not None:
            pool.shutdown()
    records.append(summary_record(records, attempted))
    return records
