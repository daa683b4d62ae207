"""Regenerate the YAML files under configs/ from one base scenario."""

from __future__ import annotations

import copy
from pathlib import Path

import yaml

from profit_shifting import calibrate
from profit_shifting.runner.config import make_targets, scenario_from_mapping, scenario_to_mapping

OUT = Path(__file__).resolve().parent.parent / "configs"

BASE = {
    "taxes": {"t1": 0.4, "t2": 0.2},
    "prices": {"p1": 2.0, "p2": 3.5, "r": 0.1},
    "sales": {"s1": 4.0, "s2": 4.0},
    "revenue": {"R1": {"a": 10.0, "b": 1.0}, "R2": {"a": 10.0, "b": 1.0}},
    "cost": {
        "C1": {"c0": 0.0, "c1": 1.7, "c2": 0.2},
        "C2": {"c0": 0.0, "c1": 1.7, "c2": 0.2},
    },
    "interest": {
        "B1": {"baseline_debt": 5.0, "beta1": 0.13, "beta2": 0.002},
        "B2": {"baseline_debt": 5.0, "beta1": 0.03, "beta2": 0.002},
    },
    "concealment": {
        "f": {"kappa": [1.0, 1.0, 1.0],
              "K": [[1.0, 0.1, 0.2], [0.1, 1.0, 0.15], [0.2, 0.15, 1.0]]},
        "g": {"kappa": [1.5, 1.5, 1.5],
              "K": [[1.0, 0.1, 0.2], [0.1, 1.0, 0.15], [0.2, 0.15, 1.0]]},
    },
}

TARGETS = {"x1": 0.4, "x2": 0.4, "y": 0.4, "C1": 2.7, "C2": 2.7,
           "B1": 0.17, "B2": 0.04, "kink": 0.5, "cap_usage": 0.5}


def _curvature_vary() -> dict:
    v = {}
    for who in ("f", "g"):
        for i in range(3):
            v[f"concealment.{who}.K.{i}.{i}"] = {"uniform": [0.5, 2.0]}
        for i, j in ((0, 1), (0, 2), (1, 2)):
            v[f"concealment.{who}.K.{i}.{j}"] = {"uniform": [0.0, 0.3]}
    for i in range(3):
        v[f"concealment.g.kappa.{i}"] = {"uniform": [1.0, 3.0]}
    v.update({
        "taxes.t1": {"uniform": [0.35, 0.6]},
        "taxes.t2": {"uniform": [0.05, 0.3]},
        "prices.r": {"uniform": [0.05, 0.15]},
        "cost.C1.c2": {"uniform": [0.05, 0.3]},
        "cost.C2.c2": {"uniform": [0.05, 0.3]},
        "interest.B1.beta2": {"uniform": [0.0, 0.004]},
        "interest.B2.beta2": {"uniform": [0.0, 0.004]},
        "targets.x1": {"uniform": [0.05, 1.0]},
        "targets.x2": {"uniform": [0.05, 1.0]},
        "targets.y": {"uniform": [0.05, 1.0]},
        "targets.B1": {"uniform": [0.15, 0.2]},
        "targets.B2": {"uniform": [0.02, 0.05]},
        "targets.kink": {"uniform": [0.05, 0.95]},
        "targets.cap_usage": {"uniform": [0.05, 0.95]},
    })
    return v


def _prices(order: str) -> dict:
    low, high = {"uniform": [1.5, 2.5]}, {"uniform": [3.0, 4.0]}
    if order == "12":
        return {"prices.p1": low, "prices.p2": high,
                "targets.C1": {"uniform": [2.5, 3.0]}, "targets.C2": {"uniform": [2.5, 3.0]}}
    if order == "21":
        return {"prices.p1": high, "prices.p2": low,
                "targets.C1": {"uniform": [2.5, 3.0]}, "targets.C2": {"uniform": [2.5, 3.0]}}
    # Mixed orderings and marginal costs anywhere in a wide band.
    wide = {"uniform": [1.5, 4.0]}
    return {"prices.p1": wide, "prices.p2": wide,
            "targets.C1": {"uniform": [1.5, 4.0]}, "targets.C2": {"uniform": [1.5, 4.0]},
            "targets.B1": {"uniform": [0.03, 0.2]}, "targets.B2": {"uniform": [0.03, 0.2]}}


def sweep(premise, order, cap, n, seed, mode="targets", extra=None, oracle=None) -> dict:
    vary = _curvature_vary()
    vary.update(_prices(order))
    if mode == "full_equality":
        vary.pop("prices.p2", None)
        vary.pop("targets.C1", None)
        vary.pop("targets.C2", None)
        vary["prices.p1"] = {"uniform": [2.0, 3.5]}
    vary.update(extra or {})
    sw = {
        "seed": seed,
        "max_scenarios": n,
        "oversampling": 100,
        "calibrate": {"mode": mode, "thin_cap": cap, "targets": dict(TARGETS)},
        "vary": vary,
    }
    if premise:
        sw["premise_filter"] = premise
    if oracle:
        sw["oracle"] = oracle
    return {"scenario": copy.deepcopy(BASE), "sweep": sw}


def null_cross() -> dict:
    return {f"concealment.{w}.K.{i}.{j}": {"values": [0.0]}
            for w in ("f", "g") for i, j in ((0, 1), (0, 2), (1, 2))}


def single_channel() -> dict:
    # Only L1y is active. The signed-minor assumptions then force L12 = 0,
    # so the goods cross terms vanish and cost curvature is negligible.
    v = {f"concealment.{w}.K.{i}.{j}": {"values": [0.0]}
         for w in ("f", "g") for i, j in ((0, 1), (1, 2))}
    v.update({f"cost.{c}.c2": {"values": [1e-12]} for c in ("C1", "C2")})
    return v


CONFIGS = {
    "sweep_P1.yaml": sweep("P1", "mixed", "slack", 300, 101),
    "sweep_P2.yaml": sweep("P2", "12", "binding", 300, 102),
    "sweep_P3.yaml": sweep("P3", "21", "binding", 300, 103),
    "sweep_P4.yaml": sweep("P4", "12", "slack", 300, 104),
    "sweep_P5.yaml": sweep("P5", "21", "slack", 300, 105),
    "sweep_unconstrained_complement_t2.yaml": sweep("unconstrained-complement-t2", "12", "none", 300, 106),
    "sweep_unconstrained_substitute_t1.yaml": sweep("unconstrained-substitute-t1", "12", "none", 300, 107),
    "sweep_unconstrained_complement_t1.yaml": sweep("unconstrained-complement-t1", "21", "none", 300, 108),
    "sweep_unconstrained_substitute_t2.yaml": sweep("unconstrained-substitute-t2", "21", "none", 300, 109),
    "sweep_corpus_unconstrained.yaml": sweep(None, "mixed", "none", 200, 201),
    "sweep_corpus_binding.yaml": sweep(None, "mixed", "binding", 150, 202),
    "sweep_corpus_slack.yaml": sweep(None, "mixed", "slack", 150, 203),
    "sweep_equal_prices_unconstrained.yaml": sweep("unconstrained-equal-prices", "mixed", "none", 100, 301, "full_equality"),
    "sweep_equal_prices_null_cross.yaml": sweep(None, "mixed", "none", 50, 302, "full_equality", null_cross()),
    "sweep_equal_prices_constrained.yaml": sweep("P6", "mixed", "slack", 100, 303, "full_equality", single_channel()),
    "sweep_equal_prices_constrained_null_cross.yaml": sweep(None, "mixed", "slack", 50, 304, "full_equality", null_cross()),
}


def reference() -> dict:
    """BASE with linear terms calibrated so every target is an interior optimum."""
    sc = calibrate(scenario_from_mapping(BASE), make_targets(TARGETS), "none")
    return scenario_to_mapping(sc)


def theta_transition(ref: dict) -> dict:
    # Walk theta from a slack cap, through the tangency, into the binding regime.
    sc = copy.deepcopy(ref)
    sc["thin_cap"] = {"theta": 0.05, "floor": 0.0}
    thetas = [0.05, 0.04, 0.03, 0.025, 0.022, 0.02, 0.018, 0.015, 0.012, 0.01, 0.005, 0.001]
    return {"scenario": sc, "sweep": {
        "max_scenarios": len(thetas),
        "vary": {"thin_cap.theta": {"values": thetas}},
    }}


def main() -> None:
    OUT.mkdir(exist_ok=True)
    header = "# Generated by tools/make_configs.py\n"
    files = dict(CONFIGS)
    ref = reference()
    files["sweep_theta_transition.yaml"] = theta_transition(ref)
    files["reference.yaml"] = {"scenario": ref}
    tc = copy.deepcopy(ref)
    tc["thin_cap"] = {"theta": 0.015, "floor": 0.0}
    files["reference_thin_cap.yaml"] = {"scenario": tc}
    for name, data in files.items():
        (OUT / name).write_text(header + yaml.safe_dump(data, sort_keys=False), encoding="utf-8")


if __name__ == "__main__":
    main()
