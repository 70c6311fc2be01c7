"""Scenario files: TOML in, validated Scenario objects out.

A scenario file looks like

    theorem = "frac_hardy"
    seed = 1

    [group]
    name = "abelian"
    nu = [1]

    [qnorm]
    kind = "euclidean"

    [exponents]
    p = 2.0
    s = 0.75

    [[corpus]]
    kind = "tent"
    r0 = 1.0
    peak = 1.5
    R = 2.0

Optional tables: weights, quadrature, output, sweep, search, sharpness.
Unknown keys are rejected everywhere and every number must be finite.
`echo` turns a parsed file back into a plain dict that parses to the same
scenario, which is what reports embed.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field, fields, replace

from .errors import ConfigError
from .group_core import GroupSpec, QuasiNormSpec, abelian, heisenberg
from .profiles import TestFunction
from .quadrature import QuadratureScheme
from .verifier import THEOREMS, Scenario
from .weights import WeightSpec

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

TOP_KEYS = {"theorem", "seed", "group", "qnorm", "exponents", "weights", "corpus", "quadrature", "output", "sweep", "search", "sharpness"}
SCHEME_KEYS = {f.name for f in fields(QuadratureScheme)} - {"seed"}
SWEEP_AXES = ("p", "q", "s")
OUTPUT_FORMATS = ("json", "csv")


@dataclass(frozen=True)
class ScenarioFile:
    """A parsed scenario plus the CLI-only tables."""

    scenario: Scenario
    output: dict = field(default_factory=dict)
    sweep: dict | None = None
    search: dict | None = None
    source: str = ""

    def with_seed(self, seed: int) -> "ScenarioFile":
        sc = self.scenario
        return replace(self, scenario=replace(sc, seed=seed, scheme=replace(sc.scheme, seed=seed)))

    def with_budget(self, budget: int) -> "ScenarioFile":
        sc = self.scenario
        return replace(self, scenario=replace(sc, scheme=replace(sc.scheme, budget=int(budget))))

    def with_exponent(self, axis: str, value: float) -> "ScenarioFile":
        return replace(self, scenario=replace(self.scenario, **{axis: float(value)}))


def _check_finite(obj, where="scenario"):
    if isinstance(obj, bool):
        return
    if isinstance(obj, float) and not math.isfinite(obj):
        raise ConfigError(f"non-finite number at {where}")
    if isinstance(obj, dict):
        for k, v in obj.items():
            _check_finite(v, f"{where}.{k}")
    elif isinstance(obj, (list, tuple)):
        for i, v in enumerate(obj):
            _check_finite(v, f"{where}[{i}]")


def _table(d, key, required=False):
    if key not in d:
        if required:
            raise ConfigError(f"missing table [{key}]")
        return {}
    t = d[key]
    if not isinstance(t, dict):
        raise ConfigError(f"[{key}] must be a table")
    return t


def _only(t: dict, allowed: set, where: str):
    extra = set(t) - set(allowed)
    if extra:
        raise ConfigError(f"unknown keys in [{where}]: {sorted(extra)}")


def _num(t, key, where, required=False, kind=float):
    if key not in t:
        if required:
            raise ConfigError(f"[{where}] needs {key}")
        return None
    v = t[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"[{where}] {key} must be a number, got {v!r}")
    if kind is int:
        if isinstance(v, float) and not v.is_integer():
            raise ConfigError(f"[{where}] {key} must be an integer, got {v!r}")
        return int(v)
    return float(v)


def parse_group(t: dict) -> GroupSpec:
    _only(t, {"name", "nu"}, "group")
    name = t.get("name")
    if name == "heisenberg":
        g = heisenberg()
        if "nu" in t and tuple(float(v) for v in t["nu"]) != g.nu:
            raise ConfigError("heisenberg group has nu = [1, 1, 2]")
        return g
    if name == "abelian":
        if "nu" not in t:
            raise ConfigError("[group] abelian needs nu")
        nu = t["nu"]
        if not isinstance(nu, list) or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in nu):
            raise ConfigError("[group] nu must be a list of numbers")
        return abelian(nu)
    raise ConfigError(f"[group] name must be 'abelian' or 'heisenberg', got {name!r}")


def parse_scheme(t: dict, seed: int) -> QuadratureScheme:
    _only(t, SCHEME_KEYS, "quadrature")
    kw = {}
    for k in SCHEME_KEYS:
        if k in t:
            is_int = isinstance(QuadratureScheme.__dataclass_fields__[k].default, int)
            kw[k] = _num(t, k, "quadrature", kind=int if is_int else float)
    return QuadratureScheme(seed=seed, **kw)


def _parse_sweep(t: dict) -> dict:
    _only(t, {"axis", "values"}, "sweep")
    axis = t.get("axis")
    if axis not in SWEEP_AXES:
        raise ConfigError(f"[sweep] axis must be one of {SWEEP_AXES}, got {axis!r}")
    vals = t.get("values", [])
    if not isinstance(vals, list):
        raise ConfigError("[sweep] values must be a list")
    return {"axis": axis, "values": [float(_num({"v": v}, "v", "sweep")) for v in vals]}


def _parse_search(t: dict) -> dict:
    _only(t, {"kind", "free", "fixed", "angular_mod", "iterations", "restarts"}, "search")
    if "kind" not in t or "free" not in t:
        raise ConfigError("[search] needs kind and free")
    out = {
        "kind": t["kind"],
        "free": {k: [float(v[0]), float(v[1])] for k, v in t["free"].items()},
        "fixed": dict(t.get("fixed", {})),
        "iterations": _num(t, "iterations", "search", kind=int) or 60,
        "restarts": _num(t, "restarts", "search", kind=int) or 3,
    }
    if "angular_mod" in t:
        out["angular_mod"] = float(t["angular_mod"])
    for k, v in out["free"].items():
        if len(t["free"][k]) != 2:
            raise ConfigError(f"[search] free.{k} must be [lo, hi]")
    return out


def scenario_from_dict(d: dict, source: str = "") -> ScenarioFile:
    """Build a ScenarioFile from an already-parsed document."""
    if not isinstance(d, dict):
        raise ConfigError("scenario must be a table")
    _only(d, TOP_KEYS, "top level")
    _check_finite(d)
    if "seed" not in d:
        raise ConfigError("seed is required")
    seed = _num(d, "seed", "top level", kind=int)
    theorem = d.get("theorem")
    if theorem not in THEOREMS:
        raise ConfigError(f"theorem must be one of {THEOREMS}, got {theorem!r}")
    g = parse_group(_table(d, "group", required=True))
    qt = _table(d, "qnorm", required=True)
    _only(qt, {"kind"}, "qnorm")
    qn = QuasiNormSpec(qt.get("kind"))
    ex = _table(d, "exponents", required=True)
    _only(ex, {"p", "q", "s"}, "exponents")
    p = _num(ex, "p", "exponents", required=True)
    q = _num(ex, "q", "exponents")
    s = _num(ex, "s", "exponents")
    weights = WeightSpec.from_dict(_table(d, "weights"))
    corpus_raw = d.get("corpus", [])
    if not isinstance(corpus_raw, list):
        raise ConfigError("corpus must be an array of tables ([[corpus]])")
    corpus = tuple(TestFunction.from_dict(c) for c in corpus_raw)
    scheme = parse_scheme(_table(d, "quadrature"), seed)
    sh = _table(d, "sharpness")
    _only(sh, {"eps", "span"}, "sharpness")
    extra = {}
    if "eps" in sh:
        extra["sharpness_eps"] = tuple(float(e) for e in sh["eps"])
    if "span" in sh:
        extra["sharpness_span"] = _num(sh, "span", "sharpness")
    sc = Scenario(theorem, g, qn, p, q, s, weights, corpus, scheme, seed, _table(d, "group")["name"], **extra)
    out = _table(d, "output")
    _only(out, {"path", "formats"}, "output")
    fmts = out.get("formats", ["json"])
    if not isinstance(fmts, list) or any(f not in OUTPUT_FORMATS for f in fmts):
        raise ConfigError(f"[output] formats must be a list drawn from {OUTPUT_FORMATS}")
    sweep = _parse_sweep(d["sweep"]) if "sweep" in d else None
    search = _parse_search(d["search"]) if "search" in d else None
    return ScenarioFile(sc, dict(out), sweep, search, source)


def loads(text: str, source: str = "<string>") -> ScenarioFile:
    try:
        d = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        # the decoder message already carries "(at line L, column C)"
        raise ConfigError(f"{source}: parse error: {exc}") from None
    return scenario_from_dict(d, source)


def load(path) -> ScenarioFile:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read scenario {path}: {exc.strerror}") from None
    return loads(text, str(path))


def echo(sf: ScenarioFile) -> dict:
    """Plain-data form of the scenario; scenario_from_dict(echo(sf)) reproduces it."""
    sc = sf.scenario
    g = sc.group
    out = {"theorem": sc.theorem, "seed": sc.seed}
    out["group"] = {"name": g.law, "nu": list(g.nu)}
    out["qnorm"] = {"kind": sc.qnorm.kind}
    out["exponents"] = {k: getattr(sc, k) for k in ("p", "q", "s") if getattr(sc, k) is not None}
    w = sc.weights.to_dict()
    if w:
        out["weights"] = w
    out["corpus"] = [u.to_dict() for u in sc.corpus]
    default = QuadratureScheme()
    quad = {k: getattr(sc.scheme, k) for k in sorted(SCHEME_KEYS) if getattr(sc.scheme, k) != getattr(default, k)}
    if quad:
        out["quadrature"] = quad
    if sc.theorem == "radial_hardy":
        out["sharpness"] = {"eps": list(sc.sharpness_eps), "span": sc.sharpness_span}
    if sf.output:
        out["output"] = dict(sf.output)
    if sf.sweep is not None:
        out["sweep"] = dict(sf.sweep)
    if sf.search is not None:
        out["search"] = dict(sf.search)
    return out
