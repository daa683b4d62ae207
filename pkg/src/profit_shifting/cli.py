"""Command line: ``profit-shifting <command> CONFIG [options]``.

Exit status is 0 on success, 1 on a terminal error and 2 when ``--strict``
is given and some applicable proposition fails.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from typing import Any, Optional, Sequence

from .errors import ConfigError, ProfitShiftingError
from .model import Scenario
from .oracle import default_box, fd_statics, grid_oracle
from .runner.config import SweepSpec, load_config
from .runner.emit import IoError, emit, render_rows, write_text
from .runner.sweep import WRTS, run_sweep
from .solver import certify, solve
from .statics import audit_propositions, lambda_shadow_analysis, statics

EXIT_OK, EXIT_ERROR, EXIT_STRICT = 0, 1, 2


def _scenario(cfg: Any) -> Scenario:
    if isinstance(cfg, SweepSpec):
        return cfg.base
    return cfg


def _wrts(args: argparse.Namespace) -> tuple[str, ...]:
    return WRTS if args.wrt is None else (args.wrt,)


def _equilibrium_row(sc: Scenario) -> dict[str, Any]:
    eq = solve(sc)
    cert = certify(eq, sc)
    row: dict[str, Any] = {
        "x1": eq.vars.x1, "x2": eq.vars.x2, "y": eq.vars.y,
        "lambda_star": eq.lambda_star, "binding": eq.binding, "ybar": eq.ybar,
        "foc_norm": eq.foc_norm, "objective": eq.objective, "iterations": eq.iterations,
        "boundary": ";".join(eq.boundary), "certificate": "pass" if cert.passed else "fail",
    }
    for c in cert.checks:
        row[f"minor.{c.name}"] = c.value
    return row


def cmd_solve(sc: Scenario, args: argparse.Namespace) -> tuple[list[dict], bool]:
    return [_equilibrium_row(sc)], False


def cmd_statics(sc: Scenario, args: argparse.Namespace) -> tuple[list[dict], bool]:
    eq = solve(sc)
    rows = []
    for w in _wrts(args):
        r = statics(eq, sc, w)
        row = {"wrt": w, "x1T": r.x1T, "x2T": r.x2T, "yT": r.yT, "sum_xT": r.sum_xT,
               "lambdaT": r.lambdaT, "phi_x": r.phi_x, "phi_y": r.phi_y,
               "phi_lambda": r.phi_lambda, "phi_lambda_weighted": r.phi_lambda_weighted,
               "interior_value": r.interior_value, "z_plus": r.z_plus, "lambda1": r.lambda1,
               "dominance": r.dominance, "mixed_mu_signs": r.mixed_mu_signs,
               "monotone_condition": r.monotone_condition,
               "assumptions": ";".join(r.assumption_failures) or "ok"}
        if r.constrained:
            s = lambda_shadow_analysis(eq, sc, r)
            row.update(shadow_expected=s.expected, shadow_consistent=s.consistent)
        rows.append(row)
    return rows, False


def cmd_oracle(sc: Scenario, args: argparse.Namespace) -> tuple[list[dict], bool]:
    eq = solve(sc)
    rows = []
    failed = False
    for w in _wrts(args):
        r = statics(eq, sc, w)
        o = fd_statics(sc, w, args.step, analytic=r, base=eq)
        rows.append({"check": f"fd.{w}", "x1T": r.x1T, "x2T": r.x2T, "yT": r.yT,
                     "fd_x1T": o.fd_x1T, "fd_x2T": o.fd_x2T, "fd_yT": o.fd_yT,
                     "max_rel_err": o.max_rel_err, "branch_crossing": o.branch_crossing,
                     "pass": o.passed})
        failed |= o.passed is False
    if args.grid_n > 0:
        g = grid_oracle(sc, default_box(eq), args.grid_n)
        gap = g.best_objective - eq.objective
        rows.append({"check": "grid", "objective": eq.objective,
                     "grid_objective": g.best_objective, "gap": gap, "pass": gap <= 1e-6})
        failed |= gap > 1e-6
    return rows, failed


def cmd_audit(sc: Scenario, args: argparse.Namespace) -> tuple[list[dict], bool]:
    eq = solve(sc)
    rows = []
    failed = False
    for w in _wrts(args):
        for v in audit_propositions(statics(eq, sc, w)):
            rows.append({
                "wrt": w, "proposition": v.name, "applicable": v.applicable,
                "passed": v.passed, "reason": v.reason,
                "claims": "; ".join(f"{c.quantity} {c.predicted} ({c.observed:.6g})" for c in v.claims),
            })
            failed |= v.passed is False
    return rows, failed


def cmd_sweep(cfg: Any, args: argparse.Namespace) -> int:
    if not isinstance(cfg, SweepSpec):
        raise ConfigError("sweep needs a config with a 'sweep' section")
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    records = run_sweep(cfg)
    emit(records, args.format, args.out)
    summary = records[-1].values
    failed = any(
        isinstance(v, str) and k.startswith("prop.") and v.split("/")[0] != v.split("/")[1]
        for k, v in summary.items()
    )
    return EXIT_STRICT if (args.strict and failed) else EXIT_OK


COMMANDS = {
    "solve": cmd_solve,
    "statics": cmd_statics,
    "oracle-check": cmd_oracle,
    "audit": cmd_audit,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="profit-shifting", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("solve", "statics", "oracle-check", "audit", "sweep"):
        sp = sub.add_parser(name)
        sp.add_argument("config", help="YAML scenario or sweep file")
        sp.add_argument("--format", choices=("csv", "json"), default="json")
        sp.add_argument("--out", default=None, help="output path (default stdout)")
        sp.add_argument("--wrt", choices=("t1", "t2"), default=None,
                        help="tax rate to vary (default both)")
        sp.add_argument("--seed", type=int, default=None, help="override the sweep seed")
        sp.add_argument("--strict", action="store_true",
                        help="exit 2 if any applicable proposition fails")
        if name == "oracle-check":
            sp.add_argument("--step", type=float, default=1e-4)
            sp.add_argument("--grid-n", type=int, default=0,
                            help="lattice size per axis for the grid oracle (0 skips it)")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.command == "sweep":
            return cmd_sweep(cfg, args)
        rows, failed = COMMANDS[args.command](_scenario(cfg), args)
        write_text(render_rows(rows, args.format), args.out)
    except (ProfitShiftingError, IoError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_STRICT if (args.strict and failed) else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
