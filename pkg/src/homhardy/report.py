"""Report documents: deterministic JSON, CSV flattening and re-checking.

Floats are written with 17 significant digits so they read back bit-exactly;
non-finite values become the strings "inf", "-inf" and "nan".
"""

from __future__ import annotations

import csv
import io
import json
import math

import numpy as np

from . import __version__
from .errors import ConfigError
from .verifier import _SEVERITY, VERDICTS

SCHEMA_VERSION = 1


def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    s = format(x, ".17g")
    if not any(c in s for c in ".en"):
        s += ".0"
    return s


def dumps(obj, indent: int = 2) -> str:
    """JSON text with 17-digit floats; key order is insertion order."""
    out = []

    def emit(o, level):
        pad = " " * (indent * (level + 1))
        end = " " * (indent * level)
        if isinstance(o, (bool, np.bool_)):
            out.append("true" if o else "false")
        elif o is None:
            out.append("null")
        elif isinstance(o, (int, np.integer)):
            out.append(str(int(o)))
        elif isinstance(o, (float, np.floating)):
            out.append(_fmt_float(float(o)))
        elif isinstance(o, str):
            out.append(json.dumps(o))
        elif isinstance(o, dict):
            if not o:
                out.append("{}")
                return
            out.append("{\n")
            for i, (k, v) in enumerate(o.items()):
                out.append(f"{pad}{json.dumps(str(k))}: ")
                emit(v, level + 1)
                out.append(",\n" if i < len(o) - 1 else "\n")
            out.append(end + "}")
        elif isinstance(o, (list, tuple)):
            if not o:
                out.append("[]")
                return
            out.append("[\n")
            for i, v in enumerate(o):
                out.append(pad)
                emit(v, level + 1)
                out.append(",\n" if i < len(o) - 1 else "\n")
            out.append(end + "]")
        else:
            raise TypeError(f"cannot serialise {type(o).__name__}")

    emit(obj, 0)
    return "".join(out) + "\n"


def _num(v):
    """Inverse of the non-finite encoding."""
    if isinstance(v, str) and v in ("inf", "-inf", "nan"):
        return float(v)
    return v


def build_document(echo: dict, report, timing: bool = False) -> dict:
    body = report.to_dict(timing=timing)
    meta = body.pop("meta")
    return {
        "schema_version": SCHEMA_VERSION,
        "scenario": echo,
        "theorem": body["theorem"],
        "overall": body["overall"],
        "applicable": body["applicable"],
        "gates": body["gates"],
        "constants": body["constants"],
        "results": body["results"],
        "extras": body["extras"],
        "meta": {"version": __version__, "evaluations": meta["evaluations"], "wall_time": meta["wall_time"]},
    }


CSV_FIELDS = ("function_id", "check", "lhs", "rhs", "constant", "ratio", "margin", "verdict")


def _csv_cell(v):
    if isinstance(v, float):
        return _fmt_float(v).strip('"')
    return "" if v is None else str(v)


def to_csv(doc: dict) -> str:
    """One row per check of every function."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for r in doc["results"]:
        main = {"check": doc["theorem"], **{k: r.get(k) for k in ("lhs", "rhs", "constant", "ratio", "margin")}}
        w.writerow([_csv_cell(v) for v in (r["function_id"], main["check"], main["lhs"], main["rhs"], main["constant"], main["ratio"], main["margin"], r["verdict"])])
        for st in r.get("steps", []):
            w.writerow([_csv_cell(v) for v in (r["function_id"], st["name"], st["lhs"], st["rhs"], st["constant"], st["ratio"], st["margin"], st["verdict"])])
    return buf.getvalue()


def recheck_verdict(lhs, rhs, constant, margin, additive: bool = False, converged: bool = True) -> str:
    """Recompute a verdict from stored numbers (lhs <= C rhs + margin)."""
    lhs, rhs, constant, margin = (float(_num(v)) for v in (lhs, rhs, constant, margin))
    bound = rhs if additive else constant * rhs
    if lhs <= bound + margin:
        return "pass"
    return "violation" if converged else "inconclusive"


def recheck_document(doc: dict) -> list:
    """Verdicts recomputed from the numbers in a report document.

    Stored verdicts of "inconclusive" keep their unconverged status; records
    without numbers (error, not_applicable) keep their stored verdict.
    """
    if not isinstance(doc, dict) or "results" not in doc:
        raise ConfigError("not a report document")
    additive_names = {"log_holder", "log_hs", "log_holder_step", "jensen_step"}
    out = []
    for r in doc["results"]:
        if r.get("verdict") not in VERDICTS:
            raise ConfigError(f"unknown verdict {r.get('verdict')!r}")
        if r.get("lhs") is None or r["verdict"] in ("error", "not_applicable"):
            out.append(r["verdict"])
            continue
        rows = [(doc["theorem"], r)] + [(st["name"], st) for st in r.get("steps", [])]
        worst = "pass"
        for name, row in rows:
            unconverged = row.get("verdict") == "inconclusive"
            v = recheck_verdict(row["lhs"], row["rhs"], row["constant"], row["margin"], name in additive_names, not unconverged)
            if _SEVERITY[v] > _SEVERITY[worst]:
                worst = v
        out.append(worst)
    return out


def exit_code(verdicts) -> int:
    """0 pass/not_applicable, 2 any violation, 1 any error, 3 inconclusive only."""
    vs = set(verdicts)
    if "violation" in vs:
        return 2
    if "error" in vs:
        return 1
    if "inconclusive" in vs:
        return 3
    return 0
