import csv
import io
import json
import subprocess
import sys

import pytest

from conftest import CONFIGS
from profit_shifting.cli import EXIT_ERROR, EXIT_OK, EXIT_STRICT, main

REF = str(CONFIGS / "reference.yaml")
CAP = str(CONFIGS / "reference_thin_cap.yaml")


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_solve_json(capsys):
    code, out, _ = run(capsys, "solve", REF)
    assert code == EXIT_OK
    row = json.loads(out)[0]
    assert row["x1"] == pytest.approx(0.4) and row["certificate"] == "pass"


def test_statics_csv_single_rate(capsys):
    code, out, _ = run(capsys, "statics", CAP, "--format", "csv", "--wrt", "t1")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == EXIT_OK and len(rows) == 1
    assert rows[0]["yT"] == "0" and rows[0]["shadow_consistent"] == "true"


def test_oracle_check(capsys):
    code, out, _ = run(capsys, "oracle-check", REF, "--grid-n", "20")
    rows = json.loads(out)
    assert code == EXIT_OK
    assert [r["check"] for r in rows] == ["fd.t1", "fd.t2", "grid"]
    assert all(r["pass"] for r in rows)


def test_audit_strict_passes_on_reference(capsys):
    code, out, _ = run(capsys, "audit", CAP, "--strict")
    assert code == EXIT_OK
    assert any(r["proposition"] == "P2" and r["passed"] for r in json.loads(out))


def test_sweep_to_file(tmp_path, capsys):
    out = tmp_path / "theta.csv"
    code, _, _ = run(capsys, "sweep", str(CONFIGS / "sweep_theta_transition.yaml"),
                     "--format", "csv", "--out", str(out), "--strict")
    rows = list(csv.DictReader(out.open()))
    assert rows[-1]["status"] == "summary"
    # The slack-constrained oracle mismatch does not affect proposition verdicts.
    assert code == EXIT_OK


def test_sweep_strict_flags_failures(tmp_path, capsys, monkeypatch):
    from profit_shifting.runner import sweep as sweep_mod

    real = sweep_mod.summary_record

    def spoiled(records, attempted):
        rec = real(records, attempted)
        rec.values["prop.P1.t1"] = "1/2"
        return rec

    monkeypatch.setattr("profit_shifting.cli.run_sweep",
                        lambda spec: sweep_mod.run_sweep(spec)[:-1] + [spoiled([], 0)])
    code, _, _ = run(capsys, "sweep", str(CONFIGS / "sweep_theta_transition.yaml"),
                     "--out", str(tmp_path / "x.json"), "--strict")
    assert code == EXIT_STRICT


def test_sweep_needs_sweep_section(capsys):
    code, _, err = run(capsys, "sweep", REF)
    assert code == EXIT_ERROR and "sweep" in err


def test_bad_config_is_reported(tmp_path, capsys):
    bad = tmp_path / "bad.yaml"
    bad.write_text("scenario:\n  taxes: {t1: 0.1, t2: 0.3}\n")
    code, _, err = run(capsys, "solve", str(bad))
    assert code == EXIT_ERROR and "T = t1 - t2 > 0" in err


def test_unwritable_output(capsys):
    code, _, err = run(capsys, "solve", REF, "--out", "/nonexistent/dir/out.json")
    assert code == EXIT_ERROR and "IoError" in err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "profit_shifting", "solve", REF, "--format", "csv"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[0].startswith("x1,x2,y")
