"""Deterministic report serialization (JSON lines, CSV)."""

from __future__ import annotations

import csv
import io
import json
import math

import numpy as np


def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    text = format(x, ".17g")
    if not any(ch in text for ch in ".eEn"):
        text += ".0"
    return text


def dumps(obj) -> str:
    """Compact JSON with every float written to 17 significant digits."""
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ",".join(f"{json.dumps(str(k))}:{dumps(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, np.ndarray):
        return dumps(obj.tolist())
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(dumps(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


CSV_FIELDS = ("index", "point", "s", "s_perp", "H2", "deficit", "umbilic", "equality", "mu0", "rho")


def records_to_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for r in records:
        if r.get("type") != "point":
            continue
        row = []
        for key in CSV_FIELDS:
            v = r.get(key)
            if key == "point":
                v = " ".join(_fmt_float(float(c)) for c in v)
            elif isinstance(v, bool):
                v = int(v)
            elif isinstance(v, float):
                v = _fmt_float(v)
            elif v is None:
                v = ""
            row.append(v)
        w.writerow(row)
    return buf.getvalue()
