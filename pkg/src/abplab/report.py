"""Deterministic JSON and CSV serialization of scenario results."""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

CSV_COLUMNS = ("scenario", "status", "exit_code", "checks", "failed_checks", "min_slack")


class ReportError(ValueError):
    pass


def _float(x):
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(x, ".17g")


def dumps(obj, indent=1, _level=0):
    """JSON with sorted keys, 17 significant digits and non-finite floats as strings."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(obj[k], indent, _level + 1)}"
                 for k in sorted(obj, key=str)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, np.integer, np.floating, bool, np.bool_)) or v is None for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _min_slack(result):
    vals = [c.slack for c in result.checks if c.slack is not None and not math.isnan(c.slack)]
    return min(vals) if vals else None


def csv_rows(results):
    rows = []
    for r in results:
        ms = _min_slack(r)
        rows.append({
            "scenario": r.name,
            "status": r.status,
            "exit_code": r.exit_code,
            "checks": ";".join(c.check for c in r.checks),
            "failed_checks": ";".join(c.check for c in r.checks if c.status != "PASS"),
            "min_slack": "" if ms is None else _float(ms).strip('"'),
        })
    return rows


def render(results, fmt="json"):
    results = list(results)
    if not results:
        raise ReportError("no results to write")
    if fmt == "json":
        if len(results) == 1:
            return dumps(results[0].to_dict()) + "\n"
        return dumps([r.to_dict() for r in results]) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
        w.writeheader()
        w.writerows(csv_rows(results))
        return buf.getvalue()
    raise ReportError(f"unknown format {fmt!r}")


def emit_report(results, path, fmt="json"):
    """Write results to ``path``; raises OSError when the path is unwritable."""
    text = render(results, fmt)
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    with open(p, "w", newline="") as fh:
        fh.write(text)
    return p
