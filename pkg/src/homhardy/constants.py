"""Admissibility constants D_1, gates, brackets and front constants.

Every D_1 here has the shape

    sup_{r > 0} (int_{|y| > r} g)^(1/q) (int_{|y| < r} h^(1-p'))^(1/p')

for radial g, h, so it reduces to a one-dimensional supremum of a product
of two cumulative tables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .errors import ConditionError, ConfigError, NumericError
from .functionals import frac_A, hs_weights
from .group_core import GroupSpec, QuasiNormSpec, sphere_measure
from .quadrature import RadialCumulative
from .weights import parse_weight

SUP_GRID_POINTS = 60
SUP_GRID_SPAN = 4.0  # decades either side of the scale
SUP_XTOL = 1e-8


def conj(p: float) -> float:
    if p <= 1:
        raise ConfigError("p>1 required")
    return p / (p - 1.0)


@dataclass(frozen=True)
class SupResult:
    value: float
    argmax: float | None
    grid_r: tuple = field(repr=False, default=())
    grid_values: tuple = field(repr=False, default=())
    diagnostic: str = ""

    @property
    def finite(self) -> bool:
        return math.isfinite(self.value)


@dataclass(frozen=True)
class ConstantsBundle:
    d1: float
    gate_value: float
    gate_name: str
    front_constant: float
    bracket_low: float | None = None
    bracket_high: float | None = None
    gates: tuple = ()  # (name, value, passed) for every stated gate
    diagnostic: str = ""

    def __post_init__(self):
        if self.bracket_low is not None and not self.bracket_low <= self.bracket_high:
            raise ValueError("bracket_low must not exceed bracket_high")

    def to_dict(self) -> dict:
        out = {
            "d1": self.d1,
            "gate_value": self.gate_value,
            "gate_name": self.gate_name,
            "front_constant": self.front_constant,
        }
        if self.bracket_low is not None:
            out["bracket"] = [self.bracket_low, self.bracket_high]
        out["gates"] = [{"name": n, "value": v, "pass": ok} for n, v, ok in self.gates]
        if self.diagnostic:
            out["diagnostic"] = self.diagnostic
        return out


# -- the one-dimensional supremum ---------------------------------------------


def sup_product(G, H, eg: float, eh: float, scale: float = 1.0, valid=(0.0, math.inf)) -> SupResult:
    """sup_r G(r)^eg H(r)^eh from a log grid plus golden-section refinement.

    G and H are vectorised; inf anywhere on the grid makes the sup inf.
    With several local maxima the refinement starts from the grid argmax,
    so the value is then only a lower bound.  Grid points outside `valid`
    (where a table overflowed) are dropped.
    """
    logs = np.linspace(-SUP_GRID_SPAN, SUP_GRID_SPAN, SUP_GRID_POINTS) * math.log(10.0) + math.log(scale)
    lo = math.log(valid[0]) if valid[0] > 0 else -math.inf
    hi = math.log(valid[1]) if math.isfinite(valid[1]) else math.inf
    clipped = (logs > lo + 1e-9) & (logs < hi - 1e-9)
    if clipped.sum() < 3:
        raise NumericError("D1 tables cover too little of the radial range")
    truncated = not clipped.all()
    logs = logs[clipped]
    r = np.exp(logs)
    Gv, Hv = np.asarray(G(r), dtype=float), np.asarray(H(r), dtype=float)
    if np.any(np.isinf(Gv)) or np.any(np.isinf(Hv)):
        which = "outer integral of g" if np.any(np.isinf(Gv)) else "inner integral of h^(1-p')"
        return SupResult(math.inf, None, tuple(r), (), f"{which} diverges")
    if np.any(np.isnan(Gv)) or np.any(np.isnan(Hv)):
        raise NumericError("D1 cumulative returned NaN")

    def prod(lr):
        rr = np.exp(np.atleast_1d(lr))
        return float((np.asarray(G(rr), dtype=float) ** eg * np.asarray(H(rr), dtype=float) ** eh)[0])

    vals = Gv**eg * Hv**eh
    i = int(np.argmax(vals))
    best_lr, best = logs[i], float(vals[i])
    diag = ""
    flat = np.max(vals) - np.min(vals) <= 1e-12 * abs(best)
    if flat:
        pass  # constant product (balanced power weights): every grid point is the sup
    elif 0 < i < len(logs) - 1 and vals[i - 1] < vals[i] and vals[i + 1] < vals[i]:
        res = optimize.minimize_scalar(
            lambda lr: -prod(lr), bracket=(logs[i - 1], logs[i], logs[i + 1]), method="golden", tol=SUP_XTOL
        )
        if -res.fun >= best:
            best_lr, best = float(res.x), float(-res.fun)
    elif i in (0, len(logs) - 1):
        diag = "maximum on the grid boundary; value is a lower bound"
    if truncated and not diag:
        diag = "weight overflowed on part of the radial range; sup taken where it is finite"
    return SupResult(best, math.exp(best_lr), tuple(r), tuple(vals), diag)


def _cumulatives(g_fun, hm_fun, Q, sphere, scale):
    G = RadialCumulative(g_fun, Q, sphere, scale=scale)
    H = RadialCumulative(hm_fun, Q, sphere, scale=scale)

    def Gr(r):
        return np.full(np.shape(r), math.inf) if math.isinf(G.tail) else G.outer(r)

    def Hr(r):
        return np.full(np.shape(r), math.inf) if math.isinf(H.head) else H.inner(r)

    return Gr, Hr, (max(G.lo, H.lo), min(G.hi, H.hi))


def d1_weights(g_fun, h_fun, p: float, q: float, g: GroupSpec, qn: QuasiNormSpec, scale: float = 1.0, return_details: bool = False):
    """sup_r G(r)^(1/q) H(r)^(1/p') with G = int_{|y|>r} g, H = int_{|y|<r} h^(1-p')."""
    if not 1 < p <= q:
        raise ConfigError("need 1 < p <= q")
    pc = conj(p)
    m = 1.0 - pc

    def hm(r):
        hv = np.asarray(h_fun(r), dtype=float)
        with np.errstate(divide="ignore"):
            return hv**m

    Gr, Hr, valid = _cumulatives(g_fun, hm, g.Q, sphere_measure(qn, g), scale)
    res = sup_product(Gr, Hr, 1.0 / q, 1.0 / pc, scale, valid)
    return res if return_details else res.value


def d1_integral_hardy(gw, hw, p: float, q: float, g: GroupSpec, qn: QuasiNormSpec, scale: float = 1.0, return_details: bool = False):
    """D_1 of the integral Hardy inequality for radial weight expressions g, h."""
    gr, hr = parse_weight(gw).radial(), parse_weight(hw).radial()
    return d1_weights(gr, hr, p, q, g, qn, scale, return_details)


def d1_power_weights(alpha: float, beta: float, p: float, q: float, Q: float, sphere: float) -> float:
    """Closed-form D_1 for h = |x|^alpha, g = |x|^beta under the balance condition."""
    pc = conj(p)
    if not beta + Q < 0:
        raise ConditionError(f"beta + Q < 0 violated (beta + Q = {beta + Q!r})")
    if not alpha < Q * (p - 1):
        raise ConditionError(f"alpha < Q(p-1) violated (alpha = {alpha!r}, Q(p-1) = {Q * (p - 1)!r})")
    bal = q * (alpha + Q) - p * (beta + Q)
    if not math.isclose(bal, p * q * Q, rel_tol=1e-12, abs_tol=1e-12):
        raise ConditionError(f"q(alpha+Q) - p(beta+Q) = pqQ violated ({bal!r} != {p * q * Q!r})")
    return sphere ** (1 / q + 1 / pc) / (abs(beta + Q) ** (1 / q) * (alpha * (1 - pc) + Q) ** (1 / pc))


def d1_frac(A, p: float, s: float, g: GroupSpec, qn: QuasiNormSpec, scale: float = 1.0, return_details: bool = False):
    """D_1 of the fractional Hardy inequality for a radial A (closure r -> A(r))."""
    if p <= 1:
        raise ConfigError("p>1 required")
    S, Q = sphere_measure(qn, g), g.Q
    sp = s * p

    def gw(r):
        return A(r) / ((S * r**Q / Q) ** p * r**sp)

    def hw(r):
        return A(r) / r**sp

    return d1_weights(gw, hw, p, p, g, qn, scale, return_details)


def d1_frac_closed(p: float, s: float, Q: float):
    """(D_1, gate) for a = 1: D_1 = Q (p-1)^(1/p') / (sp + Qp - Q)."""
    pc = conj(p)
    den = s * p + Q * p - Q
    if not den > 0:
        raise ConditionError(f"sp + Qp - Q > 0 violated ({den!r})")
    if not s * pc + Q > 0:
        raise ConditionError(f"sp' + Q > 0 violated ({s * pc + Q!r})")
    d1 = Q * (p - 1) ** (1 / pc) / den
    return d1, frac_gate(d1, p)


def d1_hs(v, z, p: float, q: float, s: float, g: GroupSpec, qn: QuasiNormSpec, scale: float = 1.0, return_details: bool = False):
    """D_1 of the Hardy-Sobolev family built from radial v, z."""
    dw = hs_weights(v, z, p, q, g, qn)
    vr = parse_weight(v).radial()
    sq = s * q

    def gw(r):
        return dw.A(r) / (dw.C_of_r(r) ** q * r**sq)

    def hw(r):
        return dw.A(r) / (vr(r) ** q * r**sq)

    return d1_weights(gw, hw, q, q, g, qn, scale, return_details)


# -- gates and front constants --------------------------------------------------


def frac_gate(d1: float, p: float) -> float:
    """D_1 (p')^(1/p') p^(1/p)."""
    pc = conj(p)
    return d1 * pc ** (1 / pc) * p ** (1 / p)


def hs_gate(d1: float, q: float) -> float:
    """D_1 (q')^(1/q') q^(1/q)."""
    return frac_gate(d1, q)


def log_hs_stated_gate(d1: float, p: float, q: float) -> float:
    """D_1 (p')^(1/p') p^(1/q), the gate written in the log Hardy-Sobolev statement."""
    pc = conj(p)
    return d1 * pc ** (1 / pc) * p ** (1 / q)


def nash_gate(d1: float, q: float) -> float:
    """2^(1/2 + 1/q) D_1."""
    return 2.0 ** (0.5 + 1.0 / q) * d1


def front_constant_frac(p: float, s: float, Q: float, c_tri: float, sphere: float, d1: float) -> float:
    gate = frac_gate(d1, p)
    if not gate < 1:
        return math.inf
    return ((2 * c_tri) ** (-Q - s * p) * sphere / Q) ** (-1 / p) / (1 - gate)


def front_constant_hs(p: float, q: float, s: float, Q: float, c_tri: float, sphere: float, d1: float) -> float:
    gate = hs_gate(d1, q)
    if not gate < 1:
        return math.inf
    return (2 * c_tri) ** ((Q + s * p) / p) * (sphere / Q) ** (-1 / p) / (1 - gate)


def bracket_CH(d1: float, p: float, q: float):
    """(D_1, D_1 (p')^(1/p') p^(1/q)): the certified range of the best constant."""
    if not math.isfinite(d1):
        raise ConfigError("bracket needs a finite D_1")
    pc = conj(p)
    return d1, d1 * pc ** (1 / pc) * p ** (1 / q)


def frac_A_closure(a, p, g, qn):
    """Radial A for the fractional Hardy weight a (re-exported for the verifier)."""
    return frac_A(parse_weight(a), p, g, qn).A
