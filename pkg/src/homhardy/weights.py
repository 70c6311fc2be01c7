"""A small closed grammar for weights.

An expression is a product of factors separated by '*':

    2.5            a positive constant
    |x|^e          power of the norm of the first variable (|y|, |y^-1x| likewise)
    exp(-c|x|^2)   Gaussian factor in |x| or |y|

for example ``"|x|^-1.5 * exp(-0.5|x|^2)"``.  Parsing happens once; the
result evaluates as a closure on arrays of norms.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

_VARS = {"|x|": "x", "|y|": "y", "|y^-1x|": "d"}
_NUM = r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_POWER = re.compile(rf"^(\|x\||\|y\||\|y\^-1x\|)(?:\^\(?({_NUM})\)?)?$")
_GAUSS = re.compile(rf"^exp\(-(?:({_NUM})\*?)?(\|x\||\|y\|)\^2\)$")
_CONST = re.compile(rf"^{_NUM}$")


@dataclass(frozen=True)
class WeightExpr:
    const: float = 1.0
    powers: tuple = (("x", 0.0), ("y", 0.0), ("d", 0.0))
    gauss: tuple = (("x", 0.0), ("y", 0.0))
    text: str = field(default="1", compare=False)

    @property
    def power(self) -> dict:
        return dict(self.powers)

    @property
    def gauss_coef(self) -> dict:
        return dict(self.gauss)

    @property
    def is_constant(self) -> bool:
        return all(v == 0 for _, v in self.powers) and all(v == 0 for _, v in self.gauss)

    def uses(self, var: str) -> bool:
        return self.power[var] != 0 or self.gauss_coef.get(var, 0.0) != 0

    def __call__(self, nx, ny=None, nd=None):
        """Evaluate on norms |x|, |y|, |y^-1 x| (arrays broadcast together)."""
        out = np.full(np.shape(nx), self.const, dtype=float)
        args = {"x": nx, "y": ny, "d": nd}
        for var, e in self.powers:
            if e != 0:
                if args[var] is None:
                    raise ConfigError(f"weight {self.text!r} needs the norm {var}")
                out = out * np.asarray(args[var], dtype=float) ** e
        for var, c in self.gauss:
            if c != 0:
                if args[var] is None:
                    raise ConfigError(f"weight {self.text!r} needs the norm {var}")
                out = out * np.exp(-c * np.asarray(args[var], dtype=float) ** 2)
        return out

    def radial(self):
        """Single-variable closure r -> w(r); only |x| factors are allowed."""
        if self.uses("y") or self.uses("d"):
            raise ConfigError(f"weight {self.text!r} must depend on |x| only")
        return lambda r: self(r)

    def scaled(self, lam: float) -> "WeightExpr":
        return WeightExpr(self.const * lam, self.powers, self.gauss, f"{lam!r} * ({self.text})")

    def split(self):
        """(F of |x|, K of |y|, exponent of |y^-1 x|) with a = F(|x|) K(|y|) |y^-1 x|^e."""
        P, G = self.power, self.gauss_coef
        F = WeightExpr(self.const, (("x", P["x"]), ("y", 0.0), ("d", 0.0)), (("x", G["x"]), ("y", 0.0)))
        K = WeightExpr(1.0, (("x", P["y"]), ("y", 0.0), ("d", 0.0)), (("x", G["y"]), ("y", 0.0)))
        return F, K, P["d"]


def parse_weight(text) -> WeightExpr:
    """Parse a weight expression (a number is accepted as a constant)."""
    if isinstance(text, WeightExpr):
        return text
    if isinstance(text, (int, float)) and not isinstance(text, bool):
        text = repr(float(text))
    if not isinstance(text, str) or not text.strip():
        raise ConfigError(f"weight must be a non-empty expression, got {text!r}")
    src = text
    const = 1.0
    powers = {"x": 0.0, "y": 0.0, "d": 0.0}
    gauss = {"x": 0.0, "y": 0.0}
    for raw in re.split(r"\*(?![^()]*\))", text.replace(" ", "")):
        if not raw:
            raise ConfigError(f"empty factor in weight {src!r}")
        if _CONST.match(raw):
            c = float(raw)
            if not (c > 0 and math.isfinite(c)):
                raise ConfigError(f"constants in weights must be positive and finite: {raw!r} in {src!r}")
            const *= c
            continue
        m = _POWER.match(raw)
        if m:
            e = float(m.group(2)) if m.group(2) is not None else 1.0
            if not math.isfinite(e):
                raise ConfigError(f"non-finite exponent in {src!r}")
            powers[_VARS[m.group(1)]] += e
            continue
        m = _GAUSS.match(raw)
        if m:
            c = float(m.group(1)) if m.group(1) is not None else 1.0
            if not (c > 0 and math.isfinite(c)):
                raise ConfigError(f"Gaussian coefficient must be positive in {src!r}")
            gauss[_VARS[m.group(2)]] += c
            continue
        raise ConfigError(f"cannot parse factor {raw!r} in weight {src!r}")
    return WeightExpr(const, tuple(powers.items()), tuple(gauss.items()), src)


ONE = parse_weight("1")


@dataclass(frozen=True)
class WeightSpec:
    """Weights for every theorem; unused entries stay at their defaults.

    a(x, y) feeds the fractional Hardy inequality, v and z the Hardy-Sobolev
    family, g and h the integral Hardy inequality.  alpha/beta are the
    power-weight shortcut h = |x|^alpha, g = |x|^beta.
    """

    a: WeightExpr = ONE
    v: WeightExpr = ONE
    z: WeightExpr = ONE
    g: WeightExpr | None = None
    h: WeightExpr | None = None
    alpha: float | None = None
    beta: float | None = None

    def __post_init__(self):
        for name in ("v", "z"):
            getattr(self, name).radial()
        if (self.alpha is None) != (self.beta is None):
            raise ConfigError("alpha and beta must be given together")
        if self.alpha is not None and (self.g is not None or self.h is not None):
            raise ConfigError("give either g/h or alpha/beta, not both")

    @property
    def g_expr(self) -> WeightExpr:
        if self.beta is not None:
            return parse_weight(f"|x|^{self.beta!r}")
        if self.g is None:
            raise ConfigError("the integral Hardy inequality needs g (or alpha/beta)")
        return self.g

    @property
    def h_expr(self) -> WeightExpr:
        if self.alpha is not None:
            return parse_weight(f"|x|^{self.alpha!r}")
        return self.h if self.h is not None else ONE

    @classmethod
    def from_dict(cls, d: dict) -> "WeightSpec":
        allowed = {"a", "v", "z", "g", "h", "alpha", "beta"}
        extra = set(d) - allowed
        if extra:
            raise ConfigError(f"unknown weight keys {sorted(extra)}")
        kw = {}
        for k in ("a", "v", "z", "g", "h"):
            if k in d:
                kw[k] = parse_weight(d[k])
        for k in ("alpha", "beta"):
            if k in d:
                val = float(d[k])
                if not math.isfinite(val):
                    raise ConfigError(f"{k} must be finite")
                kw[k] = val
        return cls(**kw)

    def to_dict(self) -> dict:
        out = {}
        for k in ("a", "v", "z"):
            w = getattr(self, k)
            if w.text != "1":
                out[k] = w.text
        for k in ("g", "h"):
            w = getattr(self, k)
            if w is not None:
                out[k] = w.text
        if self.alpha is not None:
            out["alpha"] = self.alpha
            out["beta"] = self.beta
        return out
