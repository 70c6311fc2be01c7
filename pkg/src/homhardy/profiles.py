"""Test functions u(x) = phi(|x|) * (1 + eps * omega_1(x)) on a homogeneous group.

phi is a radial profile with known breakpoints; omega_1 is the first
coordinate of the angular part D_{1/|x|} x, a bounded degree-0 factor that
makes u non-radial when eps != 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError
from .group_core import angular_projection, qnorm

PROFILES = ("tent", "truncated_power", "gaussian_ring", "indicator", "steps")

_REQUIRED = {
    "tent": ("r0", "peak", "R"),
    "truncated_power": ("gamma", "r0", "R"),
    "gaussian_ring": ("r0", "R"),
    "indicator": ("r0", "R"),
    "steps": ("radii", "levels"),
}
_OPTIONAL = {
    "tent": {"height": 1.0},
    "truncated_power": {"cap": True, "ramp_in": 2.0, "ramp_out": 10.0},
    "gaussian_ring": {"center": None, "width": None},
    "indicator": {},
    "steps": {},
}
_RADIUS_KEYS = {"r0", "peak", "R", "center", "width", "radii"}


def _smoothstep(t):
    t = np.clip(t, 0.0, 1.0)
    return t * t * (3.0 - 2.0 * t)


def _dsmoothstep(t):
    inside = (t > 0.0) & (t < 1.0)
    return np.where(inside, 6.0 * t * (1.0 - t), 0.0)


@dataclass(frozen=True)
class TestFunction:
    """Profile kind plus parameters; immutable so it can be hashed and echoed."""

    __test__ = False  # keep pytest from collecting this class

    kind: str
    params: dict = field(default_factory=dict, hash=False, compare=True)
    angular_mod: float = 0.0
    scale: float = 1.0
    label: str = ""

    def __post_init__(self):
        if self.kind not in PROFILES:
            raise ConfigError(f"unknown profile {self.kind!r}; expected one of {PROFILES}")
        missing = [k for k in _REQUIRED[self.kind] if k not in self.params]
        if missing:
            raise ConfigError(f"profile {self.kind!r} is missing parameters {missing}")
        allowed = set(_REQUIRED[self.kind]) | set(_OPTIONAL[self.kind])
        extra = set(self.params) - allowed
        if extra:
            raise ConfigError(f"profile {self.kind!r} got unknown parameters {sorted(extra)}")
        full = dict(_OPTIONAL[self.kind])
        full.update(self.params)
        if self.kind == "steps":
            full["radii"] = tuple(float(v) for v in full["radii"])
            full["levels"] = tuple(float(v) for v in full["levels"])
        object.__setattr__(self, "params", full)
        self._validate()

    def __hash__(self):
        return hash((self.kind, repr(sorted(self.params.items())), self.angular_mod, self.scale))

    def _validate(self):
        P = self.params
        if not abs(self.angular_mod) < 1.0:
            raise ConfigError("angular_mod must satisfy |eps| < 1 so that u keeps its sign")
        if self.kind == "tent":
            if not 0 < P["r0"] < P["peak"] < P["R"]:
                raise ConfigError("tent needs 0 < r0 < peak < R")
        elif self.kind == "truncated_power":
            if not 0 < P["r0"] < P["R"]:
                raise ConfigError("truncated_power needs 0 < r0 < R")
            if P["ramp_in"] <= 1 or P["ramp_out"] <= 1:
                raise ConfigError("ramp factors must exceed 1")
            if P["r0"] * (1 if P["cap"] else P["ramp_in"]) >= P["R"] / P["ramp_out"]:
                raise ConfigError("truncated_power ramps overlap; widen [r0, R]")
        elif self.kind == "gaussian_ring":
            if not 0 < P["r0"] < P["R"]:
                raise ConfigError("gaussian_ring needs 0 < r0 < R")
        elif self.kind == "indicator":
            if not 0 <= P["r0"] < P["R"]:
                raise ConfigError("indicator needs 0 <= r0 < R")
        elif self.kind == "steps":
            radii, levels = P["radii"], P["levels"]
            if len(radii) != len(levels) + 1 or len(levels) < 1:
                raise ConfigError("steps needs len(radii) == len(levels) + 1")
            if radii[0] < 0 or any(b <= a for a, b in zip(radii, radii[1:])):
                raise ConfigError("steps radii must be nonnegative and increasing")

    # -- radial profile ---------------------------------------------------

    @property
    def radial(self) -> bool:
        return self.angular_mod == 0.0

    @property
    def lipschitz_admissible(self) -> bool:
        return self.kind not in ("indicator", "steps")

    @property
    def support(self) -> tuple:
        """(inner, outer) radii; u vanishes for |x| < inner and |x| >= outer."""
        P = self.params
        if self.kind == "steps":
            return P["radii"][0], P["radii"][-1]
        if self.kind == "truncated_power" and P["cap"]:
            return 0.0, P["R"]
        return P["r0"], P["R"]

    @property
    def breakpoints(self) -> tuple:
        """Radii where the profile or its derivative may jump."""
        P = self.params
        if self.kind == "tent":
            pts = (P["r0"], P["peak"], P["R"])
        elif self.kind == "truncated_power":
            inner = P["r0"] if P["cap"] else P["r0"] * P["ramp_in"]
            pts = (P["r0"], inner, P["R"] / P["ramp_out"], P["R"])
        elif self.kind == "steps":
            pts = P["radii"]
        else:
            pts = (P["r0"], P["R"])
        return tuple(sorted({float(b) for b in pts if b > 0}))

    def profile(self, r):
        r = np.asarray(r, dtype=float)
        P = self.params
        if self.kind == "tent":
            up = (r - P["r0"]) / (P["peak"] - P["r0"])
            down = (P["R"] - r) / (P["R"] - P["peak"])
            val = P["height"] * np.clip(np.minimum(up, down), 0.0, None)
        elif self.kind == "truncated_power":
            val = self._power_parts(r)[0]
        elif self.kind == "gaussian_ring":
            val = self._ring_parts(r)[0]
        elif self.kind == "indicator":
            val = np.where((r >= P["r0"]) & (r < P["R"]), 1.0, 0.0)
        else:
            radii = np.asarray(P["radii"])
            idx = np.searchsorted(radii, r, side="right") - 1
            levels = np.asarray(P["levels"] + (0.0,))
            val = np.where((idx >= 0) & (idx < len(P["levels"])), levels[np.clip(idx, 0, len(levels) - 1)], 0.0)
        return self.scale * val

    def dprofile(self, r):
        """Derivative of the profile; raises for piecewise-constant kinds."""
        r = np.asarray(r, dtype=float)
        P = self.params
        if self.kind == "tent":
            rising = (r > P["r0"]) & (r < P["peak"])
            falling = (r > P["peak"]) & (r < P["R"])
            d = np.where(rising, P["height"] / (P["peak"] - P["r0"]), 0.0)
            d = np.where(falling, -P["height"] / (P["R"] - P["peak"]), d)
        elif self.kind == "truncated_power":
            d = self._power_parts(r)[1]
        elif self.kind == "gaussian_ring":
            d = self._ring_parts(r)[1]
        else:
            raise ConfigError(f"profile {self.kind!r} has no classical radial derivative")
        return self.scale * d

    def _power_parts(self, r):
        P = self.params
        r0, R, gam = P["r0"], P["R"], P["gamma"]
        safe = np.maximum(r, r0)
        base = (safe / r0) ** gam
        dbase = np.where(r > r0, gam * base / safe, 0.0)
        if P["cap"]:
            cin, dcin = np.ones_like(r), np.zeros_like(r)
        else:
            a, b = math.log(r0), math.log(r0 * P["ramp_in"])
            t = (np.log(np.maximum(r, 1e-300)) - a) / (b - a)
            cin = _smoothstep(t) * (r >= r0)
            dcin = _dsmoothstep(t) / ((b - a) * np.maximum(r, 1e-300))
        a, b = math.log(R / P["ramp_out"]), math.log(R)
        t = (np.log(np.maximum(r, 1e-300)) - a) / (b - a)
        cout = 1.0 - _smoothstep(t)
        dcout = -_dsmoothstep(t) / ((b - a) * np.maximum(r, 1e-300))
        val = base * cin * cout
        d = dbase * cin * cout + base * dcin * cout + base * cin * dcout
        return val, d

    def _ring_parts(self, r):
        P = self.params
        r0, R = P["r0"], P["R"]
        c = P["center"] if P["center"] is not None else 0.5 * (r0 + R)
        w = P["width"] if P["width"] is not None else 0.25 * (R - r0)
        inside = (r > r0) & (r < R)
        k = math.pi / (R - r0)
        g = np.exp(-(((r - c) / w) ** 2))
        dg = -2.0 * (r - c) / w**2 * g
        sn = np.sin(k * (r - r0))
        s2 = sn * sn
        ds2 = 2.0 * k * sn * np.cos(k * (r - r0))
        return np.where(inside, g * s2, 0.0), np.where(inside, dg * s2 + g * ds2, 0.0)

    def lipschitz_profile(self) -> float:
        """Upper bound for |phi'| (sampled densely for the smooth kinds, with 5% slack)."""
        P = self.params
        if not self.lipschitz_admissible:
            return math.inf
        if self.kind == "tent":
            return abs(self.scale) * P["height"] / min(P["peak"] - P["r0"], P["R"] - P["peak"])
        lo, hi = self.breakpoints[0], self.breakpoints[-1]
        r = np.geomspace(lo, hi, 20001)
        return 1.05 * float(np.max(np.abs(self.dprofile(r))))

    def sup_abs(self) -> float:
        lo, hi = self.support
        r = np.concatenate([np.geomspace(max(lo, 1e-12 * hi), hi, 20001), np.asarray(self.breakpoints)])
        return float(np.max(np.abs(self.profile(r)))) * (1.0 + abs(self.angular_mod))

    # -- evaluation on the group -------------------------------------------

    def evaluate(self, g, q, x):
        if self.radial:
            return self.profile(qnorm(q, g, x))
        r, omega = angular_projection(q, g, x)
        return self.profile(r) * (1.0 + self.angular_mod * omega[..., 0])

    def evaluate_parts(self, g, norm, x1):
        """u from precomputed |x| and first coordinate x_1 (nu_1 is its dilation weight)."""
        val = self.profile(norm)
        if self.radial:
            return val
        safe = np.where(norm > 0, norm, 1.0)
        return val * (1.0 + self.angular_mod * np.where(norm > 0, x1 / safe ** g.nu[0], 0.0))

    def angular_factor(self, omega):
        return 1.0 + self.angular_mod * np.asarray(omega)[..., 0]

    # -- transformations ---------------------------------------------------

    def dilated(self, lam: float) -> "TestFunction":
        """The function x -> u(D_lam x); every radius is divided by lam."""
        if not lam > 0:
            raise ConfigError("dilation parameter must be positive")
        params = {}
        for k, v in self.params.items():
            if k in _RADIUS_KEYS and v is not None:
                params[k] = tuple(x / lam for x in v) if isinstance(v, tuple) else v / lam
            else:
                params[k] = v
        return replace(self, params=params, label=f"{self.label}@D{lam:g}" if self.label else "")

    def scaled(self, c: float) -> "TestFunction":
        return replace(self, scale=self.scale * c)

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        for k, v in self.params.items():
            if v is None or (k in _OPTIONAL[self.kind] and v == _OPTIONAL[self.kind][k]):
                continue
            d[k] = list(v) if isinstance(v, tuple) else v
        if self.angular_mod:
            d["angular_mod"] = self.angular_mod
        if self.scale != 1.0:
            d["scale"] = self.scale
        if self.label:
            d["label"] = self.label
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TestFunction":
        d = dict(d)
        try:
            kind = d.pop("kind")
        except KeyError:
            raise ConfigError("corpus entry needs a 'kind'") from None
        angular_mod = float(d.pop("angular_mod", 0.0))
        scale = float(d.pop("scale", 1.0))
        label = str(d.pop("label", ""))
        return cls(kind, d, angular_mod, scale, label)


def tent(r0, peak, R, height=1.0, **kw) -> TestFunction:
    return TestFunction("tent", {"r0": r0, "peak": peak, "R": R, "height": height}, **kw)


def truncated_power(gamma, r0, R, cap=True, ramp_in=2.0, ramp_out=10.0, **kw) -> TestFunction:
    return TestFunction(
        "truncated_power",
        {"gamma": gamma, "r0": r0, "R": R, "cap": cap, "ramp_in": ramp_in, "ramp_out": ramp_out},
        **kw,
    )


def gaussian_ring(r0, R, center=None, width=None, **kw) -> TestFunction:
    return TestFunction("gaussian_ring", {"r0": r0, "R": R, "center": center, "width": width}, **kw)


def indicator(r0, R, **kw) -> TestFunction:
    return TestFunction("indicator", {"r0": r0, "R": R}, **kw)


def steps(radii, levels, **kw) -> TestFunction:
    return TestFunction("steps", {"radii": tuple(radii), "levels": tuple(levels)}, **kw)
