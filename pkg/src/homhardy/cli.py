"""Command-line front end.

    homhardy verify    --scenario FILE [--out DIR] [--format json|csv] [--timing]
    homhardy sweep     --scenario FILE [--axis s --grid 0.55,0.6,...] [--out DIR]
    homhardy constants --scenario FILE
    homhardy search    --scenario FILE
    homhardy recheck   --report FILE

Exit codes: 0 all pass or not applicable, 2 any violation, 3 inconclusive
only, 1 errors (bad input, failed evaluation).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import replace

from . import report as R
from .errors import ConfigError, HardyError
from .scenario import SWEEP_AXES, ScenarioFile, echo, load
from .verifier import extremal_search, theorem_constants, verify


def _write(text: str, out_dir, name: str, default_path=None):
    """Write to out_dir/name, else to default_path, else stdout."""
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        path = os.path.join(out_dir, name)
    elif default_path:
        path = default_path
    else:
        sys.stdout.write(text)
        return None
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path


def _load(args) -> ScenarioFile:
    sf = load(args.scenario)
    if args.seed is not None:
        sf = sf.with_seed(args.seed)
    if args.budget is not None:
        if args.budget < 1:
            raise ConfigError("--budget must be positive")
        sf = sf.with_budget(args.budget)
    return sf


def _document(sf: ScenarioFile, timing: bool) -> dict:
    rep = verify(sf.scenario)
    return R.build_document(echo(sf), rep, timing)


def cmd_verify(args) -> int:
    sf = _load(args)
    doc = _document(sf, args.timing)
    fmts = [args.format] if args.format else sf.output.get("formats", ["json"])
    base = sf.output.get("path")
    stem = os.path.splitext(os.path.basename(base))[0] if base else "report"
    for fmt in fmts:
        text = R.dumps(doc) if fmt == "json" else R.to_csv(doc)
        default = None
        if base:
            default = base if fmt == "json" or len(fmts) == 1 else os.path.splitext(base)[0] + ".csv"
        _write(text, args.out, f"{stem}.{fmt}", default)
    _summary(doc)
    return R.exit_code(r["verdict"] for r in doc["results"])


def _summary(doc):
    counts = {}
    for r in doc["results"]:
        counts[r["verdict"]] = counts.get(r["verdict"], 0) + 1
    parts = ", ".join(f"{k}={v}" for k, v in sorted(counts.items()))
    print(f"{doc['theorem']}: overall {doc['overall']} ({parts or 'empty corpus'})", file=sys.stderr)


def _parse_grid(text: str):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"--grid must be comma-separated numbers, got {text!r}") from None


SWEEP_FIELDS = ("axis", "value", "gate_value", "front_constant", "worst_ratio", "overall")


def cmd_sweep(args) -> int:
    sf = _load(args)
    spec = dict(sf.sweep or {})
    if args.axis:
        spec["axis"] = args.axis
    if args.grid is not None:
        spec["values"] = _parse_grid(args.grid)
    axis, values = spec.get("axis"), spec.get("values", [])
    if axis not in SWEEP_AXES:
        raise ConfigError(f"sweep axis must be one of {SWEEP_AXES}")
    if not values or not all(math.isfinite(v) for v in values):
        raise ConfigError("sweep grid is empty or not finite")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_FIELDS)
    codes = []
    for i, v in enumerate(values):
        pt = sf.with_exponent(axis, v)
        pt = replace(pt, sweep=None)
        doc = _document(pt, args.timing)
        if args.out:
            _write(R.dumps(doc), args.out, f"point_{i:03d}.json")
        c = doc["constants"] or {}
        ratios = [r["ratio"] for r in doc["results"] if r["verdict"] != "not_applicable" and r.get("ratio") is not None]
        ratios = [float(R._num(x)) for x in ratios]
        worst = max(ratios) if ratios else math.nan
        gate = float(R._num(c.get("gate_value", math.nan)))
        front = float(R._num(c.get("front_constant", math.inf)))
        w.writerow([axis] + [R._csv_cell(x) for x in (float(v), gate, front, worst)] + [doc["overall"]])
        codes.append(R.exit_code(r["verdict"] for r in doc["results"]))
    _write(buf.getvalue(), args.out, "summary.csv")
    return max(codes, key=lambda c: {0: 0, 3: 1, 1: 2, 2: 3}[c])


def cmd_constants(args) -> int:
    sf = _load(args)
    gates, bundle = theorem_constants(sf.scenario)
    doc = {
        "schema_version": R.SCHEMA_VERSION,
        "theorem": sf.scenario.theorem,
        "gates": [g.to_dict() for g in gates],
        "constants": bundle.to_dict() if bundle else None,
    }
    _write(R.dumps(doc), args.out, "constants.json")
    return 0


def cmd_search(args) -> int:
    sf = _load(args)
    if sf.search is None:
        raise ConfigError("search needs a [search] table in the scenario")
    fam = {k: v for k, v in sf.search.items() if k not in ("iterations", "restarts")}
    res = extremal_search(sf.scenario, fam, sf.search["iterations"], sf.search["restarts"])
    doc = {"schema_version": R.SCHEMA_VERSION, "scenario": echo(sf), "search": res.to_dict()}
    _write(R.dumps(doc), args.out, "search.json")
    return 0


def cmd_recheck(args) -> int:
    try:
        with open(args.report, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read report {args.report}: {exc}") from None
    verdicts = R.recheck_document(doc)
    changed = [r["function_id"] for r, v in zip(doc["results"], verdicts) if r["verdict"] != v]
    if changed:
        print(f"stored verdicts disagree with the numbers for: {', '.join(changed)}", file=sys.stderr)
    return R.exit_code(verdicts)


class _Parser(argparse.ArgumentParser):
    """Usage errors exit 1; exit code 2 is reserved for violations."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="homhardy", description="Verify Hardy-type inequalities on homogeneous groups.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, out=True):
        p.add_argument("--scenario", required=True, help="scenario TOML file")
        p.add_argument("--seed", type=int, help="override the scenario seed")
        p.add_argument("--budget", type=int, help="override the quadrature evaluation budget")
        if out:
            p.add_argument("--out", help="output directory (default: output.path or stdout)")
        p.add_argument("--timing", action="store_true", help="record wall time (breaks byte-identical reports)")

    p = sub.add_parser("verify", help="verify one scenario")
    common(p)
    p.add_argument("--format", choices=("json", "csv"))
    p.set_defaults(func=cmd_verify)
    p = sub.add_parser("sweep", help="verify along a grid of one exponent")
    common(p)
    p.add_argument("--axis", choices=SWEEP_AXES)
    p.add_argument("--grid", help="comma-separated values")
    p.set_defaults(func=cmd_sweep)
    p = sub.add_parser("constants", help="gates and constants only")
    common(p)
    p.set_defaults(func=cmd_constants)
    p = sub.add_parser("search", help="extremal search over a profile family")
    common(p)
    p.set_defaults(func=cmd_search)
    p = sub.add_parser("recheck", help="recompute verdicts of a stored report")
    p.add_argument("--report", required=True)
    p.set_defaults(func=cmd_recheck)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except HardyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
