"""YAML configuration: scenario files and sweep files.

A config file holds a ``scenario`` mapping and optionally a ``sweep``
mapping. Parameter paths are dotted keys into the scenario mapping, for
example ``taxes.t1``, ``cost.C2.c2`` or ``concealment.f.K.0.2``. Setting an
off-diagonal ``K.i.j`` also sets ``K.j.i``. Calibration targets use the
``targets.`` prefix. See the README for the full schema.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Union

import yaml

from ..calibrate import EquilibriumTargets
from ..errors import InvalidParameters, OutOfValidityRegion, ParseError, ValidationError
from ..forms import (
    BankInterestSchedule,
    ConcealmentQuadratic,
    FirmPrimitives,
    QuadraticCost,
    QuadraticRevenue,
    ThinCapRule,
)
from ..model import Scenario, TaxRegime
from ..statics import PROPOSITIONS

CALIBRATION_MODES = ("targets", "full_equality")
CAP_MODES = ("none", "slack", "binding")
TARGET_FIELDS = ("x1", "x2", "y", "C1", "C2", "B1", "B2", "kink", "cap_usage")


def _number(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(path, f"must be a number, got {value!r}")
    return float(value)


def _get(m: Any, key: str, path: str) -> Any:
    if not isinstance(m, dict):
        raise ValidationError(path, "must be a mapping")
    if key not in m:
        raise ValidationError(f"{path}.{key}" if path else key, "required field missing")
    return m[key]


def _build(path: str, ctor, *args, **kwargs):
    try:
        return ctor(*args, **kwargs)
    except InvalidParameters as exc:
        raise ValidationError(path, str(exc)) from exc


def _numbers(m: Any, path: str, keys: tuple[str, ...]) -> list[float]:
    return [_number(_get(m, k, path), f"{path}.{k}") for k in keys]


def _concealment(m: Any, path: str) -> ConcealmentQuadratic:
    kappa = _get(m, "kappa", path)
    if not isinstance(kappa, list) or len(kappa) != 3:
        raise ValidationError(f"{path}.kappa", "must be a list of 3 numbers")
    kappa = [_number(v, f"{path}.kappa.{i}") for i, v in enumerate(kappa)]
    K = m.get("K", [[0.0] * 3 for _ in range(3)])
    if not isinstance(K, list) or len(K) != 3 or any(
        not isinstance(row, list) or len(row) != 3 for row in K
    ):
        raise ValidationError(f"{path}.K", "must be a 3x3 list of lists")
    K = [[_number(v, f"{path}.K.{i}.{j}") for j, v in enumerate(row)] for i, row in enumerate(K)]
    return _build(path, ConcealmentQuadratic, tuple(kappa), tuple(tuple(r) for r in K))


def scenario_from_mapping(m: Any) -> Scenario:
    """Validated Scenario from the nested ``scenario`` mapping."""
    t1, t2 = _numbers(_get(m, "taxes", ""), "taxes", ("t1", "t2"))
    taxes = _build("taxes", TaxRegime, t1, t2)
    p1, p2, r = _numbers(_get(m, "prices", ""), "prices", ("p1", "p2", "r"))
    s1, s2 = _numbers(_get(m, "sales", ""), "sales", ("s1", "s2"))
    rev, cost, intr, conc = (_get(m, k, "") for k in ("revenue", "cost", "interest", "concealment"))
    R = [
        _build(f"revenue.R{c}", QuadraticRevenue, *_numbers(_get(rev, f"R{c}", "revenue"), f"revenue.R{c}", ("a", "b")))
        for c in (1, 2)
    ]
    C = [
        _build(
            f"cost.C{c}",
            QuadraticCost,
            *_numbers(_get(cost, f"C{c}", "cost"), f"cost.C{c}", ("c0", "c1", "c2")),
        )
        for c in (1, 2)
    ]
    B = [
        _build(
            f"interest.B{c}",
            BankInterestSchedule,
            *_numbers(
                _get(intr, f"B{c}", "interest"), f"interest.B{c}", ("baseline_debt", "beta1", "beta2")
            ),
        )
        for c in (1, 2)
    ]
    f = _concealment(_get(conc, "f", "concealment"), "concealment.f")
    g = _concealment(_get(conc, "g", "concealment"), "concealment.g")
    thin_cap = None
    tc = m.get("thin_cap")
    if tc is not None:
        theta = _number(_get(tc, "theta", "thin_cap"), "thin_cap.theta")
        floor = _number(tc.get("floor", 0.0), "thin_cap.floor")
        thin_cap = _build("thin_cap", ThinCapRule, theta, floor)
    primitives = FirmPrimitives(R[0], R[1], C[0], C[1], B[0], B[1], f, g)
    sc = _build("prices", Scenario, taxes, p1, p2, r, s1, s2, primitives, thin_cap)
    try:
        sc.ybar
    except OutOfValidityRegion as exc:
        raise ValidationError("thin_cap", str(exc)) from exc
    return sc


def scenario_to_mapping(sc: Scenario) -> dict:
    pr = sc.primitives

    def conc(spec: ConcealmentQuadratic) -> dict:
        return {"kappa": list(spec.kappa), "K": [list(row) for row in spec.K]}

    out = {
        "taxes": {"t1": sc.taxes.t1, "t2": sc.taxes.t2},
        "prices": {"p1": sc.p1, "p2": sc.p2, "r": sc.r},
        "sales": {"s1": sc.s1, "s2": sc.s2},
        "revenue": {f"R{c}": {"a": R.a, "b": R.b} for c, R in ((1, pr.R1), (2, pr.R2))},
        "cost": {f"C{c}": {"c0": C.c0, "c1": C.c1, "c2": C.c2} for c, C in ((1, pr.C1), (2, pr.C2))},
        "interest": {
            f"B{c}": {"baseline_debt": B.baseline_debt, "beta1": B.beta1, "beta2": B.beta2}
            for c, B in ((1, pr.B1), (2, pr.B2))
        },
        "concealment": {"f": conc(pr.f), "g": conc(pr.g)},
    }
    if sc.thin_cap is not None:
        out["thin_cap"] = {"theta": sc.thin_cap.theta, "floor": sc.thin_cap.floor}
    return out


def flatten(m: Any, prefix: str = "") -> dict[str, Any]:
    """Dotted-path view of a nested mapping; lists are indexed by position."""
    out: dict[str, Any] = {}
    items = m.items() if isinstance(m, dict) else enumerate(m)
    for k, v in items:
        key = f"{prefix}{k}"
        if isinstance(v, (dict, list)):
            out.update(flatten(v, key + "."))
        else:
            out[key] = v
    return out


def set_path(m: dict, path: str, value: Any) -> None:
    """Assign ``value`` at a dotted path, creating mappings as needed.

    Off-diagonal concealment entries ``K.i.j`` are mirrored to ``K.j.i``.
    """
    parts = path.split(".")
    _assign(m, parts, value)
    if len(parts) >= 3 and parts[-3] == "K" and parts[-2] != parts[-1]:
        _assign(m, parts[:-2] + [parts[-1], parts[-2]], value)


def _assign(m: dict, parts: list[str], value: Any) -> None:
    node: Any = m
    for part in parts[:-1]:
        if isinstance(node, list):
            node = node[int(part)]
        else:
            if node.get(part) is None:
                node[part] = {}
            node = node[part]
    if isinstance(node, list):
        node[int(parts[-1])] = value
    else:
        node[parts[-1]] = value


@dataclass(frozen=True)
class Distribution:
    """One varied parameter: explicit values, a linear grid, or a random law."""

    kind: str
    values: tuple[float, ...] = ()
    low: float = 0.0
    high: float = 0.0

    @property
    def random(self) -> bool:
        return self.kind in ("uniform", "loguniform")

    def draw(self, rng) -> float:
        if self.kind == "uniform":
            return rng.uniform(self.low, self.high)
        if self.kind == "loguniform":
            return math.exp(rng.uniform(math.log(self.low), math.log(self.high)))
        return self.values[rng.randrange(len(self.values))]


def _distribution(spec: Any, path: str) -> Distribution:
    if not isinstance(spec, dict) or len(spec) != 1:
        raise ValidationError(path, "must be a mapping with exactly one of values, grid, uniform, loguniform")
    ((kind, arg),) = spec.items()
    if kind == "values":
        if not isinstance(arg, list) or not arg:
            raise ValidationError(f"{path}.values", "must be a nonempty list")
        return Distribution("values", tuple(_number(v, f"{path}.values.{i}") for i, v in enumerate(arg)))
    if kind == "grid":
        lo, hi = _number(_get(arg, "low", f"{path}.grid"), f"{path}.grid.low"), _number(
            _get(arg, "high", f"{path}.grid"), f"{path}.grid.high"
        )
        n = _get(arg, "count", f"{path}.grid")
        if isinstance(n, bool) or not isinstance(n, int) or n < 1:
            raise ValidationError(f"{path}.grid.count", "must be a positive integer")
        vals = tuple(lo + (hi - lo) * k / (n - 1) for k in range(n)) if n > 1 else (lo,)
        return Distribution("grid", vals)
    if kind in ("uniform", "loguniform"):
        if not isinstance(arg, list) or len(arg) != 2:
            raise ValidationError(f"{path}.{kind}", "must be [low, high]")
        lo, hi = (_number(v, f"{path}.{kind}.{i}") for i, v in enumerate(arg))
        if not lo <= hi:
            raise ValidationError(f"{path}.{kind}", "low must be <= high")
        if kind == "loguniform" and not lo > 0:
            raise ValidationError(f"{path}.{kind}", "low must be > 0")
        return Distribution(kind, low=lo, high=hi)
    raise ValidationError(path, f"unknown distribution {kind!r}")


@dataclass(frozen=True)
class Calibration:
    mode: str
    cap: str
    targets: dict[str, float]


@dataclass(frozen=True)
class OracleOptions:
    fd: bool = True
    step: float = 1e-4
    grid: bool = False
    grid_n: int = 60


@dataclass(frozen=True)
class SweepSpec:
    base: Scenario
    base_mapping: dict
    varied: tuple[tuple[str, Distribution], ...]
    premise_filter: Optional[str] = None
    seed: int = 0
    max_scenarios: int = 100
    oversampling: int = 100
    calibration: Optional[Calibration] = None
    oracle: OracleOptions = field(default_factory=OracleOptions)
    workers: int = 1

    @property
    def random(self) -> bool:
        return any(d.random for _, d in self.varied)


def _calibration(m: Any, path: str) -> Calibration:
    mode = m.get("mode", "targets")
    if mode not in CALIBRATION_MODES:
        raise ValidationError(f"{path}.mode", f"must be one of {CALIBRATION_MODES}")
    cap = m.get("thin_cap", "none")
    if cap not in CAP_MODES:
        raise ValidationError(f"{path}.thin_cap", f"must be one of {CAP_MODES}")
    raw = _get(m, "targets", path)
    if not isinstance(raw, dict):
        raise ValidationError(f"{path}.targets", "must be a mapping")
    targets = {}
    for k, v in raw.items():
        if k not in TARGET_FIELDS:
            raise ValidationError(f"{path}.targets.{k}", f"unknown target; expected one of {TARGET_FIELDS}")
        targets[k] = _number(v, f"{path}.targets.{k}")
    return Calibration(mode, cap, targets)


def make_targets(values: dict[str, float], path: str = "sweep.calibrate.targets") -> EquilibriumTargets:
    for k in TARGET_FIELDS[:7]:
        if k not in values:
            raise ValidationError(f"{path}.{k}", "required field missing")
    return _build(path, EquilibriumTargets, **{k: values[k] for k in TARGET_FIELDS if k in values})


def _int(m: dict, key: str, path: str, default: int, minimum: int = 0) -> int:
    v = m.get(key, default)
    if isinstance(v, bool) or not isinstance(v, int) or v < minimum:
        raise ValidationError(f"{path}.{key}", f"must be an integer >= {minimum}")
    return v


def sweep_from_mapping(scenario: Any, sweep: Any) -> SweepSpec:
    base = scenario_from_mapping(scenario)
    if not isinstance(sweep, dict):
        raise ValidationError("sweep", "must be a mapping")
    vary = sweep.get("vary", {}) or {}
    if not isinstance(vary, dict):
        raise ValidationError("sweep.vary", "must be a mapping of parameter paths")
    calibration = None
    if "calibrate" in sweep:
        calibration = _calibration(sweep["calibrate"], "sweep.calibrate")
    known = set(flatten(scenario))
    varied = []
    for p, spec in vary.items():
        path = f"sweep.vary.{p}"
        if p.startswith("targets."):
            if calibration is None:
                raise ValidationError(path, "target paths need a calibrate block")
            if p.split(".", 1)[1] not in TARGET_FIELDS:
                raise ValidationError(path, "unknown calibration target")
        elif p not in known and not p.startswith("thin_cap."):
            raise ValidationError(path, "unknown parameter path")
        varied.append((p, _distribution(spec, path)))
    pf = sweep.get("premise_filter")
    if pf is not None and pf not in PROPOSITIONS:
        raise ValidationError("sweep.premise_filter", f"must be one of {PROPOSITIONS}")
    seed = _int(sweep, "seed", "sweep", 0)
    if seed >= 2**64:
        raise ValidationError("sweep.seed", "must fit in 64 bits")
    oracle_m = sweep.get("oracle", {}) or {}
    oracle = OracleOptions(
        fd=bool(oracle_m.get("fd", True)),
        step=_number(oracle_m.get("step", 1e-4), "sweep.oracle.step"),
        grid=bool(oracle_m.get("grid", False)),
        grid_n=_int(oracle_m, "grid_n", "sweep.oracle", 60, 1),
    )
    return SweepSpec(
        base=base,
        base_mapping=copy.deepcopy(scenario),
        varied=tuple(varied),
        premise_filter=pf,
        seed=seed,
        max_scenarios=_int(sweep, "max_scenarios", "sweep", 100),
        oversampling=_int(sweep, "oversampling", "sweep", 100, 1),
        calibration=calibration,
        oracle=oracle,
        workers=_int(sweep, "workers", "sweep", 1, 1),
    )


def parse_text(text: str) -> Any:
    try:
        return yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark or exc.context_mark
        line = mark.line + 1 if mark is not None else None
        raise ParseError(line, exc.problem or str(exc)) from exc
    except yaml.YAMLError as exc:
        raise ParseError(None, str(exc)) from exc


def load_mapping(data: Any) -> Union[Scenario, SweepSpec]:
    if not isinstance(data, dict):
        raise ValidationError("", "top level must be a mapping")
    scenario = _get(data, "scenario", "")
    if "sweep" in data:
        return sweep_from_mapping(scenario, data["sweep"])
    return scenario_from_mapping(scenario)


def load_config(path: Union[str, Path]) -> Union[Scenario, SweepSpec]:
    """Parse and validate a scenario or sweep file."""
    text = Path(path).read_text(encoding="utf-8")
    return load_mapping(parse_text(text))
