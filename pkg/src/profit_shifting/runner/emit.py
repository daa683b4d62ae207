"""CSV and JSON writers with fixed column order and 12 significant digits."""

from __future__ import annotations

import csv
import io
import json
import math
import sys
from pathlib import Path
from typing import Any, Iterable, Optional, Union

from .sweep import COLUMNS, RunRecord

DIGITS = 12


class IoError(OSError):
    def __init__(self, path: Union[str, Path], detail: str) -> None:
        self.path = str(path)
        super().__init__(f"cannot write {path}: {detail}")


def format_number(v: float) -> str:
    return format(v, f".{DIGITS}g")


def _cell(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format_number(v)
    return str(v)


def _json_value(v: Any) -> Any:
    if isinstance(v, bool) or v is None:
        return v
    if isinstance(v, float):
        return float(format_number(v)) if math.isfinite(v) else None
    return v


def rows_to_csv(rows: list[dict[str, Any]], columns: tuple[str, ...]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_cell(row.get(c)) for c in columns])
    return buf.getvalue()


def rows_to_json(rows: list[dict[str, Any]], columns: tuple[str, ...]) -> str:
    out = [{c: _json_value(row.get(c)) for c in columns} for row in rows]
    return json.dumps(out, indent=1) + "\n"


def render_rows(rows: list[dict[str, Any]], fmt: str, columns: Optional[tuple[str, ...]] = None) -> str:
    if columns is None:
        columns = tuple(dict.fromkeys(k for row in rows for k in row))
    if fmt == "csv":
        return rows_to_csv(rows, columns)
    if fmt == "json":
        return rows_to_json(rows, columns)
    raise ValueError(f"format must be 'csv' or 'json', got {fmt!r}")


def render(records: Iterable[RunRecord], fmt: str) -> str:
    return render_rows([r.values for r in records], fmt, COLUMNS)


def write_text(text: str, path: Optional[Union[str, Path]] = None) -> None:
    """Write to ``path``, or to stdout when ``path`` is None or '-'."""
    if path is None or str(path) == "-":
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise IoError(path, exc.strerror or str(exc)) from exc


def emit(records: list[RunRecord], fmt: str, path: Optional[Union[str, Path]] = None) -> None:
    """Serialize sweep records as CSV or JSON with the fixed column order."""
    write_text(render(records, fmt), path)
