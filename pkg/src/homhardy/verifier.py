"""Per-theorem verification: gates, both sides, verdicts.

A scenario fixes the group, the quasi-norm, the exponents, the weights and a
corpus of test functions.  Gates are evaluated first; when one fails no
integral of a test function is computed and every record is marked
not_applicable.  Otherwise each function gets a record whose verdict is

    pass          lhs <= C rhs + margin,  margin = lhs_err + C rhs_err
    violation     the inequality fails and every integral converged
    inconclusive  it fails but some integral stopped short of its tolerance
    error         an integral could not be evaluated at all

Logarithmic inequalities compare additively (lhs <= rhs + margin) and report
ratio = exp(lhs - rhs).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import optimize

from . import constants as K
from .errors import ConfigError, DomainError, HardyError, NumericError
from .functionals import (
    angular_moment,
    entropy_term,
    frac_A,
    gagliardo,
    hs_weights,
    nested_hs_rhs,
    radial_derivative_norm,
    radial_lp,
)
from .group_core import GroupSpec, QuasiNormSpec, certified_ctri, check_compatible, sphere_measure
from .profiles import TestFunction
from .quadrature import IntegralResult, QuadratureScheme, RadialCumulative, radial_integral
from .weights import WeightSpec, parse_weight

THEOREMS = (
    "integral_hardy",
    "radial_hardy",
    "frac_hardy",
    "uncertainty",
    "hardy_sobolev",
    "log_holder",
    "log_hs",
    "nash",
)
LOG_TYPE = ("log_holder", "log_hs")
VERDICTS = ("pass", "inconclusive", "violation", "not_applicable", "error")
_SEVERITY = {"pass": 0, "not_applicable": 0, "inconclusive": 1, "violation": 2, "error": 3}


@dataclass(frozen=True)
class Scenario:
    theorem: str
    group: GroupSpec
    qnorm: QuasiNormSpec
    p: float
    q: float | None = None
    s: float | None = None
    weights: WeightSpec = field(default_factory=WeightSpec)
    corpus: tuple = ()
    scheme: QuadratureScheme = field(default_factory=QuadratureScheme)
    seed: int = 0
    group_name: str = ""
    sharpness_eps: tuple = (0.2, 0.1, 0.05)
    sharpness_span: float = 1e4

    def __post_init__(self):
        if self.theorem not in THEOREMS:
            raise ConfigError(f"unknown theorem {self.theorem!r}; expected one of {THEOREMS}")
        check_compatible(self.qnorm, self.group)
        object.__setattr__(self, "corpus", tuple(self.corpus))
        for name in ("p", "q", "s"):
            v = getattr(self, name)
            if v is not None and not math.isfinite(v):
                raise ConfigError(f"{name} must be finite")
        needs_q = self.theorem in ("integral_hardy", "hardy_sobolev", "log_holder", "log_hs", "nash")
        if needs_q and self.q is None:
            raise ConfigError(f"theorem {self.theorem} needs the exponent q")
        needs_s = self.theorem in ("frac_hardy", "uncertainty", "hardy_sobolev", "log_hs", "nash")
        if needs_s and self.s is None:
            raise ConfigError(f"theorem {self.theorem} needs the exponent s")
        if self.theorem == "radial_hardy":
            for u in self.corpus:
                if not u.radial:
                    raise ConfigError("radial_hardy needs radial test functions (angular_mod = 0)")

    def with_corpus(self, corpus) -> "Scenario":
        return replace(self, corpus=tuple(corpus))


@dataclass(frozen=True)
class Gate:
    name: str
    value: float
    passed: bool
    required: bool = True
    note: str = ""

    def to_dict(self):
        return {"name": self.name, "value": self.value, "pass": self.passed, "required": self.required, "note": self.note}


@dataclass
class Check:
    """One inequality lhs <= constant * rhs (or lhs <= rhs for additive checks)."""

    name: str
    lhs: float
    rhs: float
    constant: float
    lhs_error: float
    rhs_error: float
    additive: bool = False
    converged: bool = True

    @property
    def margin(self) -> float:
        if self.additive:
            return self.lhs_error + self.rhs_error
        c = self.constant if math.isfinite(self.constant) else 0.0
        return self.lhs_error + c * self.rhs_error

    @property
    def ratio(self) -> float:
        if self.additive:
            d = self.lhs - self.rhs
            return math.exp(d) if d < 700 else math.inf
        if self.rhs == 0.0:
            return 0.0 if self.lhs == 0.0 else math.inf
        return self.lhs / self.rhs

    @property
    def verdict(self) -> str:
        bound = self.rhs if self.additive else self.constant * self.rhs
        if self.lhs <= bound + self.margin:
            return "pass"
        return "violation" if self.converged else "inconclusive"

    def to_dict(self):
        return {
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "constant": self.constant,
            "ratio": self.ratio,
            "margin": self.margin,
            "lhs_error": self.lhs_error,
            "rhs_error": self.rhs_error,
            "verdict": self.verdict,
        }


@dataclass
class FunctionRecord:
    function_id: str
    function: dict
    checks: list = field(default_factory=list)
    verdict: str = "pass"
    message: str = ""
    evaluations: int = 0

    @property
    def main(self) -> Check | None:
        return self.checks[0] if self.checks else None

    @property
    def ratio(self) -> float:
        return self.main.ratio if self.main else math.nan

    def finalize(self):
        if self.verdict in ("error", "not_applicable"):
            return self
        worst = "pass"
        for c in self.checks:
            if _SEVERITY[c.verdict] > _SEVERITY[worst]:
                worst = c.verdict
        self.verdict = worst
        return self

    def to_dict(self):
        m = self.main
        out = {
            "function_id": self.function_id,
            "function": self.function,
            "lhs": m.lhs if m else None,
            "rhs": m.rhs if m else None,
            "constant": m.constant if m else None,
            "ratio": m.ratio if m else None,
            "margin": m.margin if m else None,
            "verdict": self.verdict,
            "steps": [c.to_dict() for c in self.checks[1:]],
            "evaluations": self.evaluations,
        }
        if self.message:
            out["message"] = self.message
        return out


@dataclass
class VerificationReport:
    theorem: str
    gates: list
    constants: K.ConstantsBundle | None
    records: list
    applicable: bool
    extras: dict = field(default_factory=dict)
    evaluations: int = 0
    wall_time: float = 0.0

    @property
    def verdicts(self):
        return [r.verdict for r in self.records]

    @property
    def overall(self) -> str:
        vs = self.verdicts
        if not self.applicable:
            return "not_applicable"
        for v in ("error", "violation", "inconclusive"):
            if v in vs:
                return v
        return "pass"

    def to_dict(self, timing: bool = False) -> dict:
        return {
            "theorem": self.theorem,
            "applicable": self.applicable,
            "overall": self.overall,
            "gates": [g.to_dict() for g in self.gates],
            "constants": self.constants.to_dict() if self.constants else None,
            "results": [r.to_dict() for r in self.records],
            "extras": self.extras,
            "meta": {"evaluations": self.evaluations, "wall_time": self.wall_time if timing else None},
        }


# -- gates and constants -----------------------------------------------------------


def _gate(name, value, required=True, note=""):
    ok = bool(math.isfinite(value) and value < 1.0) if "<1" in name else bool(value)
    return Gate(name, float(value), ok, required, note)


def _cond(name, holds: bool, required=True, note=""):
    return Gate(name, 1.0 if holds else 0.0, bool(holds), required, note)


def _power_weights(sc):
    w = sc.weights
    return w.alpha is not None


def theorem_constants(sc: Scenario):
    """(gates, ConstantsBundle or None); never integrates a test function."""
    g, qn, p, q, s = sc.group, sc.qnorm, sc.p, sc.q, sc.s
    Q = g.Q
    gates = []
    if not p > 1:
        raise ConfigError(f"p>1 required (every inequality assumes p > 1; got p={p!r})")
    th = sc.theorem
    c_tri = certified_ctri(qn, g)
    S = sphere_measure(qn, g)

    if th == "integral_hardy":
        gates.append(_cond("1<p<=q<inf", p <= q))
        if not p <= q:
            return gates, None
        d1_res = K.d1_integral_hardy(sc.weights.g_expr, sc.weights.h_expr, p, q, g, qn, return_details=True)
        d1 = d1_res.value
        diag = d1_res.diagnostic
        if _power_weights(sc):
            try:
                closed = K.d1_power_weights(sc.weights.alpha, sc.weights.beta, p, q, Q, S)
                diag = (diag + "; " if diag else "") + f"closed-form power-weight D1 = {closed!r}"
            except HardyError as exc:
                diag = (diag + "; " if diag else "") + f"power-weight closed form not applicable: {exc}"
        gates.append(_cond("D1<inf", math.isfinite(d1)))
        if not math.isfinite(d1):
            return gates, K.ConstantsBundle(d1, math.inf, "D1<inf", math.inf, gates=_gt(gates), diagnostic=diag)
        lo, hi = K.bracket_CH(d1, p, q)
        return gates, K.ConstantsBundle(d1, 0.0, "D1<inf", hi, lo, hi, gates=_gt(gates), diagnostic=diag)

    if th == "radial_hardy":
        gates.append(_cond("1<p<Q", p < Q))
        C = p / (Q - p) if p < Q else math.inf
        return gates, K.ConstantsBundle(math.nan, p / Q, "1<p<Q", C, gates=_gt(gates))

    if th in ("frac_hardy", "uncertainty"):
        a = sc.weights.a if th == "frac_hardy" else parse_weight("1")
        gates.append(_cond("s>-Q/p", s > -Q / p))
        if th == "uncertainty" or a.is_constant:
            gates.append(_cond("s>0 and sp>Q", s > 0 and s * p > Q, required=th == "uncertainty"))
        if not s > -Q / p or (th == "uncertainty" and not (s > 0 and s * p > Q)):
            return gates, None
        A = frac_A(a, p, g, qn).A
        d1_res = K.d1_frac(A, p, s, g, qn, return_details=True)
        d1, diag = d1_res.value, d1_res.diagnostic
        if a.is_constant:
            # the closed form is exact for constant a; the numeric sup is kept as a cross-check
            try:
                d1c, _ = K.d1_frac_closed(p, s, Q)
                diag = (diag + "; " if diag else "") + f"numeric sup D1 = {d1!r}"
                d1 = d1c
            except HardyError as exc:
                diag = (diag + "; " if diag else "") + f"closed form unavailable: {exc}"
        gate = K.frac_gate(d1, p) if math.isfinite(d1) else math.inf
        gates.append(_gate("D1(p')^(1/p')p^(1/p)<1", gate))
        C = K.front_constant_frac(p, s, Q, c_tri, S, d1) if math.isfinite(d1) else math.inf
        return gates, K.ConstantsBundle(d1, gate, "D1(p')^(1/p')p^(1/p)<1", C, gates=_gt(gates), diagnostic=diag)

    if th == "log_holder":
        gates.append(_cond("1<p<q<inf", p < q))
        return gates, K.ConstantsBundle(math.nan, 0.0, "1<p<q<inf", q / (q - p) if p < q else math.inf, gates=_gt(gates))

    # Hardy-Sobolev family
    pp = 2.0 if th == "nash" else p
    if th == "nash":
        gates.append(_cond("p=2", p == 2.0))
        gates.append(_cond("2<q<inf", q > 2))
        if not (p == 2.0 and q > 2):
            return gates, None
    elif th == "log_hs":
        gates.append(_cond("1<p<q<inf", p < q))
        if not p < q:
            return gates, None
    else:
        gates.append(_cond("1<p<=q<inf", p <= q))
        if not p <= q:
            return gates, None
    gates.append(_cond("s>-Q/p", s > -Q / pp))
    if not s > -Q / pp:
        return gates, None
    d1_res = K.d1_hs(sc.weights.v, sc.weights.z, pp, q, s, g, qn, return_details=True)
    d1, diag = d1_res.value, d1_res.diagnostic
    hs_gate = K.hs_gate(d1, q) if math.isfinite(d1) else math.inf
    if th == "log_hs":
        stated = K.log_hs_stated_gate(d1, pp, q) if math.isfinite(d1) else math.inf
        gates.append(_gate("D1(p')^(1/p')p^(1/q)<1", stated, note="gate as stated for the logarithmic inequality"))
    if th == "nash":
        ng = K.nash_gate(d1, q) if math.isfinite(d1) else math.inf
        gates.append(_gate("2^(1/2+1/q)D1<1", ng, note="gate as stated for the Nash inequality"))
    gates.append(_gate("D1(q')^(1/q')q^(1/q)<1", hs_gate, note="gate of the Hardy-Sobolev step used by the chain"))
    front = K.front_constant_hs(pp, q, s, Q, c_tri, S, d1) if math.isfinite(d1) else math.inf
    if th == "log_hs":
        C, name = front**pp, "D1(p')^(1/p')p^(1/q)<1"
    elif th == "nash":
        C, name = front**2, "2^(1/2+1/q)D1<1"
    else:
        C, name = front, "D1(q')^(1/q')q^(1/q)<1"
    gv = next(gt.value for gt in gates if gt.name == name)
    return gates, K.ConstantsBundle(d1, gv, name, C, gates=_gt(gates), diagnostic=diag)


def _gt(gates):
    return tuple((g.name, g.value, g.passed) for g in gates)


def check_admissibility(sc: Scenario) -> list:
    """Every gate of the scenario's theorem with its value and pass flag."""
    gates, _ = theorem_constants(sc)
    return gates


# -- building blocks for the sides -------------------------------------------------


def _unwrap(fn, *args, **kw):
    """Run an integral; an unconverged one yields its partial result and converged=False."""
    try:
        return fn(*args, **kw), True
    except NumericError as exc:
        if isinstance(exc.partial, IntegralResult):
            return exc.partial, False
        raise


def _f(x) -> float:
    return float(x)


def _powk(res: IntegralResult, k: float) -> IntegralResult:
    """v -> v^k with a first-order bound."""
    v = max(_f(res.value), 0.0)
    val = v**k
    lo = max(v - res.error_bound, 0.0) ** k
    hi = (v + res.error_bound) ** k
    return IntegralResult(val, max(val - lo, hi - val), res.evaluations)


def _ball_mass(u: TestFunction, g, qn):
    """r -> int_{B(0,r)} |u| as a cumulative table."""
    M1 = angular_moment(u, 1.0, g, qn, 32)
    phi = lambda r: np.abs(u.profile(r))  # noqa: E731
    return RadialCumulative(phi, g.Q, M1, scale=u.support[1], breaks=u.breakpoints)


def _integral_hardy_lhs(u, gw, qexp, g, qn, scheme):
    F = _ball_mass(u, g, qn)
    gr = gw.radial()
    S = sphere_measure(qn, g)
    b = u.breakpoints
    lo, hi = b[0] * 1e-6, b[-1] * 1e6

    def fun(r):
        return F.inner(r) ** qexp * gr(r) * r ** (g.Q - 1)

    vals = []
    for lev in (0, 1):
        v, n, _, _ = radial_integral(fun, lo, hi, b, scheme.at_level(lev))
        vals.append((v, n))
    (v0, n0), (v1, n1) = vals
    return IntegralResult(S * v1, S * abs(v1 - v0), n0 + n1)


def _safe_weight(fn):
    def w(r):
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            return fn(r)

    return w


# -- per-theorem evaluation of one function ---------------------------------------


def evaluate_function(sc: Scenario, bundle: K.ConstantsBundle, u: TestFunction, fid: str = "") -> FunctionRecord:
    rec = FunctionRecord(fid or u.label or u.kind, u.to_dict())
    try:
        _EVALUATORS[sc.theorem](sc, bundle, u, rec)
    except NumericError as exc:
        rec.verdict, rec.message = "error", f"numeric error: {exc}"
    except (ConfigError, DomainError) as exc:
        rec.verdict, rec.message = "error", str(exc)
    for c in rec.checks:
        for attr in ("lhs", "rhs", "lhs_error", "rhs_error", "constant"):
            setattr(c, attr, float(getattr(c, attr)))
    return rec.finalize()


def _eval_integral_hardy(sc, bundle, u, rec):
    p, q = sc.p, sc.q
    g, qn, sch = sc.group, sc.qnorm, sc.scheme
    L = _integral_hardy_lhs(u, sc.weights.g_expr, q, g, qn, sch).root(q)
    hr = sc.weights.h_expr.radial()
    R = radial_lp(u, p, hr, g, qn, sch).root(p)
    rec.evaluations = L.evaluations + R.evaluations
    rec.checks.append(Check("integral_hardy", L.value, R.value, bundle.front_constant, L.error_bound, R.error_bound))


def _eval_radial_hardy(sc, bundle, u, rec):
    p, g, qn, sch = sc.p, sc.group, sc.qnorm, sc.scheme
    L = radial_lp(u, p, lambda r: r ** (-p), g, qn, sch).root(p)
    R = radial_derivative_norm(u, p, g, qn, sch)
    rec.evaluations = L.evaluations + R.evaluations
    rec.checks.append(Check("radial_hardy", L.value, R.value, bundle.front_constant, L.error_bound, R.error_bound))


def _eval_frac_hardy(sc, bundle, u, rec):
    p, s, g, qn, sch = sc.p, sc.s, sc.group, sc.qnorm, sc.scheme
    A = frac_A(sc.weights.a, p, g, qn).A
    L = radial_lp(u, p, lambda r: A(r) * r ** (-s * p), g, qn, sch).root(p)
    G, ok = _unwrap(gagliardo, u, p, s, sc.weights.a, sch, g, qn)
    R = G.root(p)
    rec.evaluations = L.evaluations + R.evaluations
    rec.checks.append(Check("frac_hardy", L.value, R.value, bundle.front_constant, L.error_bound, R.error_bound, converged=ok))


def _eval_uncertainty(sc, bundle, u, rec):
    p, s, g, qn, sch = sc.p, sc.s, sc.group, sc.qnorm, sc.scheme
    pc = K.conj(p)
    L2 = radial_lp(u, 2.0, lambda r: np.ones_like(r), g, qn, sch)
    W = radial_lp(u, p, lambda r: r ** (-s * p), g, qn, sch).root(p)
    D = radial_lp(u, pc, lambda r: r ** (s * pc), g, qn, sch).root(pc)
    G, ok = _unwrap(gagliardo, u, p, s, None, sch, g, qn)
    Gp = G.root(p)
    rhs = Gp.value * D.value
    rhs_err = Gp.error_bound * D.value + Gp.value * D.error_bound + Gp.error_bound * D.error_bound
    rec.checks.append(Check("uncertainty", L2.value, rhs, bundle.front_constant, L2.error_bound, rhs_err, converged=ok))
    h_rhs = W.value * D.value
    h_err = W.error_bound * D.value + W.value * D.error_bound + W.error_bound * D.error_bound
    rec.checks.append(Check("holder_step", L2.value, h_rhs, 1.0, L2.error_bound, h_err))
    rec.evaluations = L2.evaluations + W.evaluations + D.evaluations + G.evaluations


def _hs_A(sc, pp):
    """Radial A of the Hardy-Sobolev family."""
    dw = hs_weights(sc.weights.v, sc.weights.z, pp, sc.q, sc.group, sc.qnorm)
    return _safe_weight(dw.A)


def _eval_hs(sc, bundle, u, rec):
    p, q, s, g, qn, sch = sc.p, sc.q, sc.s, sc.group, sc.qnorm, sc.scheme
    A = _hs_A(sc, p)
    L = radial_lp(u, q, lambda r: A(r) * r ** (-s * q), g, qn, sch).root(q)
    R, ok = _unwrap(nested_hs_rhs, u, sc.weights.z, sc.weights.v, p, q, s, sch, g, qn)
    rec.evaluations = L.evaluations + R.evaluations
    rec.checks.append(Check("hardy_sobolev", L.value, R.value, bundle.front_constant, L.error_bound, R.error_bound, converged=ok))


def _log_ratio(Ia: IntegralResult, a: float, Ib: IntegralResult, b: float):
    """a log Ia - b log Ib with a first-order bound."""
    val = a * math.log(Ia.value) - b * math.log(Ib.value)
    err = abs(a) * Ia.error_bound / Ia.value + abs(b) * Ib.error_bound / Ib.value
    return val, err


def _eval_log_holder(sc, bundle, u, rec):
    p, q, g, qn, sch = sc.p, sc.q, sc.group, sc.qnorm, sc.scheme
    one = lambda r: np.ones_like(r)  # noqa: E731
    Ip = radial_lp(u, p, one, g, qn, sch)
    Iq = radial_lp(u, q, one, g, qn, sch)
    if not (Ip.value > 0 and Iq.value > 0):
        raise DomainError("log-Hoelder inequality needs u != 0")
    E = entropy_term(u, None, 0.0, p, sch, g, qn)
    k = q / (q - p)
    lr, lr_err = _log_ratio(Iq, p / q, Ip, 1.0)
    rec.evaluations = Ip.evaluations + Iq.evaluations + E.evaluations
    rec.checks.append(Check("log_holder", E.value, k * lr, 1.0, E.error_bound, k * lr_err, additive=True))


def _eval_log_hs(sc, bundle, u, rec):
    p, q, s, g, qn, sch = sc.p, sc.q, sc.s, sc.group, sc.qnorm, sc.scheme
    A = _hs_A(sc, p)
    Wq = radial_lp(u, q, lambda r: A(r) * r ** (-s * q), g, qn, sch)
    Wp = radial_lp(u, p, lambda r: A(r) ** (p / q) * r ** (-s * p), g, qn, sch)
    if not (Wp.value > 0 and Wq.value > 0):
        raise DomainError("the weighted function w vanishes; entropy undefined")
    E = entropy_term(u, lambda r: A(r) ** (1.0 / q), s, p, sch, g, qn)
    R, ok = _unwrap(nested_hs_rhs, u, sc.weights.z, sc.weights.v, p, q, s, sch, g, qn)
    k = q / (q - p)
    C = bundle.front_constant
    if R.value > 0:
        fin = k * (math.log(C) + p * math.log(R.value) - math.log(Wp.value))
        fin_err = k * (p * R.error_bound / R.value + Wp.error_bound / Wp.value)
    else:
        fin, fin_err = -math.inf, 0.0
    rec.checks.append(Check("log_hs", E.value, fin, 1.0, E.error_bound, fin_err, additive=True, converged=ok))
    lr, lr_err = _log_ratio(Wq, p / q, Wp, 1.0)
    rec.checks.append(Check("log_holder_step", E.value, k * lr, 1.0, E.error_bound, k * lr_err, additive=True))
    rec.evaluations = Wq.evaluations + Wp.evaluations + E.evaluations + R.evaluations


def _eval_nash(sc, bundle, u, rec):
    q, s, g, qn, sch = sc.q, sc.s, sc.group, sc.qnorm, sc.scheme
    A = _hs_A(sc, 2.0)
    N2 = radial_lp(u, 2.0, lambda r: A(r) ** (2.0 / q) * r ** (-2.0 * s), g, qn, sch)
    N1 = radial_lp(u, 1.0, lambda r: A(r) ** (1.0 / q) * r ** (-s), g, qn, sch)
    R, ok = _unwrap(nested_hs_rhs, u, sc.weights.z, sc.weights.v, 2.0, q, s, sch, g, qn)
    lhs = _powk(N2, 2.0 - 2.0 / q)  # ||g||_2^(4-4/q) = (||g||_2^2)^(2-2/q)
    t1 = _powk(N1, 2.0 * (q - 2.0) / q)
    t2 = _powk(R, 2.0)
    rhs = t1.value * t2.value
    rhs_err = t1.error_bound * t2.value + t1.value * t2.error_bound + t1.error_bound * t2.error_bound
    rec.checks.append(Check("nash", lhs.value, rhs, bundle.front_constant, lhs.error_bound, rhs_err, converged=ok))
    if not N2.value > 0:
        # u = 0: the Jensen step has no normalised density to act on
        rec.evaluations = N2.evaluations + N1.evaluations + R.evaluations
        return
    # Jensen: log(||g||_2^2 / ||g||_1) <= int |g|^2/||g||_2^2 log|g| = (entropy + log ||g||_2^2) / 2
    E = entropy_term(u, lambda r: A(r) ** (1.0 / q), s, 2.0, sch, g, qn)
    jl, jl_err = _log_ratio(N2, 1.0, N1, 1.0)
    jr = 0.5 * (E.value + math.log(N2.value))
    jr_err = 0.5 * (E.error_bound + N2.error_bound / N2.value)
    rec.checks.append(Check("jensen_step", jl, jr, 1.0, jl_err, jr_err, additive=True))
    rec.evaluations = N2.evaluations + N1.evaluations + R.evaluations + E.evaluations


_EVALUATORS = {
    "integral_hardy": _eval_integral_hardy,
    "radial_hardy": _eval_radial_hardy,
    "frac_hardy": _eval_frac_hardy,
    "uncertainty": _eval_uncertainty,
    "hardy_sobolev": _eval_hs,
    "log_holder": _eval_log_holder,
    "log_hs": _eval_log_hs,
    "nash": _eval_nash,
}


# -- driver -------------------------------------------------------------------------


def verify(sc: Scenario) -> VerificationReport:
    """Gates, constants and one record per corpus function."""
    t0 = time.perf_counter()
    gates, bundle = theorem_constants(sc)
    required_ok = all(gt.passed for gt in gates if gt.required)
    applicable = required_ok and bundle is not None and math.isfinite(bundle.front_constant)
    records = []
    for i, u in enumerate(sc.corpus):
        fid = u.label or f"{i}:{u.kind}"
        if not applicable:
            records.append(FunctionRecord(fid, u.to_dict(), verdict="not_applicable", message="a required gate fails"))
            continue
        records.append(evaluate_function(sc, bundle, u, fid))
    extras = {}
    if sc.theorem == "radial_hardy" and applicable:
        extras["sharpness"] = sharpness_probe(sc, bundle)
    rep = VerificationReport(sc.theorem, gates, bundle, records, applicable, extras)
    rep.evaluations = int(sum(r.evaluations for r in records))
    rep.wall_time = time.perf_counter() - t0
    return rep


def verify_integral_hardy(sc):
    return verify(_as(sc, "integral_hardy"))


def verify_radial_hardy(sc):
    return verify(_as(sc, "radial_hardy"))


def verify_frac_hardy(sc):
    return verify(_as(sc, "frac_hardy"))


def verify_uncertainty(sc):
    return verify(_as(sc, "uncertainty"))


def verify_hs(sc):
    return verify(_as(sc, "hardy_sobolev"))


def verify_log_holder(sc):
    return verify(_as(sc, "log_holder"))


def verify_log_hs(sc):
    return verify(_as(sc, "log_hs"))


def verify_nash(sc):
    return verify(_as(sc, "nash"))


def _as(sc, theorem):
    return sc if sc.theorem == theorem else replace(sc, theorem=theorem)


# -- radial Hardy sharpness probe -------------------------------------------------------


def near_extremal(Q: float, p: float, eps: float, r0: float = 1.0, span: float = 1e4) -> TestFunction:
    """phi = (max(r, r0)/r0)^gamma, gamma = -(Q-p)/p + eps, cut off smoothly from R/10 to R."""
    gamma = -(Q - p) / p + eps
    return TestFunction(
        "truncated_power",
        {"gamma": gamma, "r0": r0, "R": r0 * span, "cap": True, "ramp_out": 10.0},
        label=f"near_extremal(eps={eps!r})",
    )


def sharpness_probe(sc: Scenario, bundle) -> dict:
    """Ratios of the near-extremal family; an empirical lower bound for the sharp constant."""
    Q, p = sc.group.Q, sc.p
    rows = []
    for eps in sc.sharpness_eps:
        u = near_extremal(Q, p, eps, span=sc.sharpness_span)
        rec = evaluate_function(sc, bundle, u, u.label)
        rows.append({"eps": eps, "ratio": rec.ratio, "verdict": rec.verdict})
    return {"constant": bundle.front_constant, "family": rows, "best_ratio": max(r["ratio"] for r in rows)}


# -- extremal search ---------------------------------------------------------------


@dataclass
class ExtremalResult:
    best_ratio: float
    params: dict
    trace: list
    converged: bool
    evaluations: int

    def to_dict(self):
        return {
            "best_ratio": self.best_ratio,
            "params": self.params,
            "converged": self.converged,
            "evaluations": self.evaluations,
            "trace": self.trace,
        }


def extremal_search(sc: Scenario, family: dict, iterations: int = 60, restarts: int = 3, seed: int | None = None) -> ExtremalResult:
    """Maximise lhs/rhs over a parametric profile family by Nelder-Mead with seeded restarts.

    family = {"kind": ..., "free": {name: [lo, hi], ...}, "fixed": {...}}
    with at most 6 free parameters.  Parameter vectors that do not make a
    valid test function, or whose rhs vanishes, are skipped.
    """
    free = dict(family.get("free", {}))
    fixed = dict(family.get("fixed", {}))
    kind = family.get("kind")
    extra = set(family) - {"kind", "free", "fixed", "angular_mod"}
    if extra:
        raise ConfigError(f"unknown family keys {sorted(extra)}")
    if not 1 <= len(free) <= 6:
        raise ConfigError("extremal search needs between 1 and 6 free parameters")
    names = list(free)
    lo = np.array([float(free[n][0]) for n in names])
    hi = np.array([float(free[n][1]) for n in names])
    if not np.all(lo < hi):
        raise ConfigError("each free parameter needs lo < hi")
    gates, bundle = theorem_constants(sc)
    if not (all(gt.passed for gt in gates if gt.required) and bundle is not None):
        raise ConfigError("extremal search needs a scenario whose gates pass")
    rng = np.random.default_rng(sc.seed if seed is None else seed)
    trace, cache = [], {}
    spent = [0]

    def build(x):
        params = dict(fixed)
        params.update({n: float(v) for n, v in zip(names, x)})
        return TestFunction(kind, params, angular_mod=float(family.get("angular_mod", 0.0)))

    def objective(x):
        x = np.clip(x, lo, hi)
        key = tuple(np.round(x, 12))
        if key in cache:
            return cache[key]
        spent[0] += 1
        val = math.inf
        try:
            u = build(x)
            rec = evaluate_function(sc, bundle, u)
            m = rec.main
            if rec.verdict != "error" and m is not None and m.rhs > 0 and math.isfinite(m.ratio):
                val = -m.ratio
        except ConfigError:
            pass
        cache[key] = val
        trace.append({"params": dict(zip(names, map(float, x))), "ratio": -val if math.isfinite(val) else None})
        return val

    best_x, best_v, converged = None, math.inf, True
    per_start = max(1, iterations // max(1, restarts))
    for _ in range(max(1, restarts)):
        x0 = lo + (hi - lo) * rng.random(len(names))
        res = optimize.minimize(
            objective,
            x0,
            method="Nelder-Mead",
            bounds=list(zip(lo, hi)),
            options={"maxfev": per_start, "xatol": 1e-6, "fatol": 1e-9},
        )
        if res.fun < best_v:
            best_x, best_v = np.clip(res.x, lo, hi), float(res.fun)
        converged = converged and bool(res.success)
    if best_x is None or not math.isfinite(best_v):
        return ExtremalResult(math.nan, {}, trace, False, spent[0])
    return ExtremalResult(-best_v, dict(zip(names, map(float, best_x))), trace, converged, spent[0])
