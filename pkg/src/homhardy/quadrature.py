"""Deterministic quadrature on homogeneous groups.

Everything here is built from composite Gauss-Legendre panels.  Radial
integrals run over geometric panels between breakpoints and close the two
ends with a power-law extrapolation fitted to the last nodes.  Angular
integrals use a node set on the unit quasi-sphere whose weights realise the
surface measure sigma of the polar decomposition

    int_G f(x) dx = int_0^inf int_S f(D_r w) r^(Q-1) dsigma(w) dr.

Every routine evaluates at two resolutions and reports the difference as the
error bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .errors import ConfigError, NumericError
from .group_core import (
    GroupSpec,
    QuasiNormSpec,
    certified_ctri,
    check_compatible,
    dilate,
    group_mul,
    product_parts,
    qnorm,
    qnorm_parts,
    radial_slope,
    ray_extent,
    sphere_measure,
)


@dataclass(frozen=True)
class QuadratureScheme:
    order: int = 8  # Gauss points per panel
    per_decade: float = 3.0  # panels per decade near features
    grade_depth: int = 2  # extra halvings toward each breakpoint
    angular: int = 16  # base angular resolution
    cartesian_panels: int = 24  # panels per axis for box rules
    rtol: float = 1e-2
    budget: int = 400_000_000
    r_min_factor: float = 1e-6
    r_max_factor: float = 1e3
    max_level: int = 4
    seed: int = 0

    def __post_init__(self):
        if self.order < 2 or self.per_decade <= 0 or self.angular < 2:
            raise ConfigError("quadrature scheme needs order >= 2, per_decade > 0, angular >= 2")
        if not (0 < self.r_min_factor < 1 < self.r_max_factor):
            raise ConfigError("need 0 < r_min_factor < 1 < r_max_factor")
        if self.budget < 1 or self.rtol <= 0:
            raise ConfigError("budget and rtol must be positive")

    def at_level(self, level: int) -> "QuadratureScheme":
        f = 1.5**level
        return replace(
            self,
            per_decade=self.per_decade * f,
            grade_depth=self.grade_depth + level,
            angular=int(round(self.angular * f)),
            cartesian_panels=self.cartesian_panels * 2**level,
        )


@dataclass(frozen=True)
class IntegralResult:
    value: float
    error_bound: float
    evaluations: int

    def __post_init__(self):
        object.__setattr__(self, "value", float(self.value))
        object.__setattr__(self, "error_bound", float(self.error_bound))
        object.__setattr__(self, "evaluations", int(self.evaluations))
        if not self.error_bound >= 0:
            raise ValueError("error_bound must be nonnegative")

    def root(self, k: float) -> "IntegralResult":
        """Propagate the bound through v -> v^(1/k)."""
        v = max(self.value, 0.0)
        lo = max(v - self.error_bound, 0.0) ** (1.0 / k)
        hi = (v + self.error_bound) ** (1.0 / k)
        mid = v ** (1.0 / k)
        return IntegralResult(mid, max(mid - lo, hi - mid), self.evaluations)


# -- one-dimensional building blocks -----------------------------------------


@lru_cache(maxsize=64)
def _gauss(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    return x, w


def gauss_on_edges(edges, order: int):
    """Composite Gauss nodes and weights on consecutive panels [e_i, e_{i+1}]."""
    edges = np.asarray(edges, dtype=float)
    x, w = _gauss(order)
    a, b = edges[:-1, None], edges[1:, None]
    half = 0.5 * (b - a)
    nodes = (a + b) * 0.5 + half * x
    return nodes.ravel(), (half * w).ravel()


def log_gauss_on_edges(edges, order: int):
    """Gauss nodes in log r on each panel; exact for r^k times low-degree logs."""
    edges = np.asarray(edges, dtype=float)
    t, w = gauss_on_edges(np.log(edges), order)
    r = np.exp(t)
    return r, w * r


def graded_edges(lo, hi, breaks=(), per_decade=3.0, depth=2, far_density=1.0, ratio=0.5):
    """Panel edges on [lo, hi] through the given breakpoints.

    Between consecutive points the panels are log-uniform; intervals that
    touch lo or hi and lie more than a decade from every breakpoint use the
    coarser far_density.  Each breakpoint gets `depth` extra panels whose
    widths shrink by `ratio` toward it, from both sides.
    """
    if not 0 < lo < hi:
        raise ValueError(f"bad radial range [{lo}, {hi}]")
    feats = sorted({float(b) for b in breaks if lo < b < hi})
    pts = [lo]
    if feats:
        if feats[0] / 10 > lo:
            pts.append(feats[0] / 10)
        pts.extend(feats)
        if feats[-1] * 10 < hi:
            pts.append(feats[-1] * 10)
    pts.append(hi)
    pts = sorted(set(pts))
    soft_lo = pts[1] if feats and feats[0] / 10 > lo else None
    soft_hi = pts[-2] if feats and feats[-1] * 10 < hi else None
    featset = set(feats)
    # an end that sits on a breakpoint (up to rounding) is graded like one
    featset |= {x for x in (lo, hi) if any(math.isclose(x, float(b), rel_tol=1e-12) for b in breaks)}
    out = []
    for a, b in zip(pts[:-1], pts[1:]):
        far = (a == lo and b == soft_lo) or (a == soft_hi and b == hi)
        dens = far_density if far else per_decade
        n = max(1, int(math.ceil(dens * math.log10(b / a) - 1e-9)))
        seg = a * (b / a) ** (np.arange(n + 1) / n)
        out.append(seg)
        L = b - a
        for k in range(2, depth + 2):
            if a in featset:
                out.append([a + L * 0.5 * ratio ** (k - 1)])
            if b in featset:
                out.append([b - L * 0.5 * ratio ** (k - 1)])
    e = np.unique(np.concatenate([np.atleast_1d(np.asarray(s, dtype=float)) for s in out]))
    return e[(e >= lo) & (e <= hi)]


def _power_end(r1, f1, r2, f2, side: str, edge, floor=None, fallback=None):
    """Integral of the power law through (r1, f1), (r2, f2) beyond the grid.

    side='head' integrates over (0, edge) with edge <= r1 < r2; side='tail'
    over (edge, inf) with r1 < r2 <= edge.  Returns (value, exponent); value
    is inf for a divergent law.
    """
    if f1 == 0.0 and f2 == 0.0:
        return 0.0, None
    if f1 == 0.0 or f2 == 0.0 or np.sign(f1) != np.sign(f2):
        k = fallback
    else:
        k = math.log(f2 / f1) / math.log(r2 / r1)
    if side == "head":
        if floor is not None and (k is None or k < floor):
            k = floor
        if k is None:
            return 0.0, None
        if k <= -1.0:
            return math.inf, k
        return f1 * (edge / r1) ** k * edge / (k + 1.0), k
    if fallback is not None and (k is None or k >= -1.0):
        k = fallback
    if k is None or k >= -1.0:
        return math.inf, k
    return f2 * (edge / r2) ** k * edge / (-1.0 - k), k


def radial_integral(f, lo, hi, breaks, scheme, head=True, tail=True, head_floor=None, tail_fallback=None):
    """Integral of a vectorised f over (0, inf) from panels on [lo, hi] plus ends.

    Returns (value, evaluations, nodes, weighted values).  Raises NumericError
    on a divergent end or a non-decaying tail.
    """
    edges = graded_edges(lo, hi, breaks, scheme.per_decade, scheme.grade_depth)
    r, w = log_gauss_on_edges(edges, scheme.order)
    vals = np.asarray(f(r), dtype=float)
    if not np.all(np.isfinite(vals)):
        bad = r[~np.isfinite(vals)][0]
        raise NumericError(f"integrand not finite at r={bad!r}", point=bad)
    total = float(np.dot(vals, w))
    if head:
        h, _ = _power_end(r[0], vals[0], r[1], vals[1], "head", edges[0], floor=head_floor)
        if math.isinf(h):
            raise NumericError(f"radial integral diverges at the origin (r<{lo:g})", partial=total)
        total += h
    if tail:
        _check_tail_decay(r, vals * w, hi)
        t, _ = _power_end(r[-2], vals[-2], r[-1], vals[-1], "tail", edges[-1], fallback=tail_fallback)
        if math.isinf(t):
            raise NumericError(f"radial integral diverges at infinity (r>{hi:g})", partial=total)
        total += t
    return total, len(r), r, vals * w


def _check_tail_decay(r, contrib, hi):
    last = np.sum(contrib[r > hi / 10])
    prev = np.sum(contrib[(r > hi / 100) & (r <= hi / 10)])
    total = np.sum(np.abs(contrib))
    # a last decade below rounding level of the total cannot matter
    if abs(last) > 1e-15 * total and abs(last) >= abs(prev):
        raise NumericError(
            f"divergent radial tail: last-decade sum {last:.3e} >= previous {prev:.3e}",
            partial=float(np.sum(contrib)),
        )


# -- angular rules ------------------------------------------------------------


def _trapezoid_circle(n):
    psi = 2 * np.pi * (np.arange(n) + 0.5) / n
    return psi, np.full(n, 2 * np.pi / n)


def angular_rule(q: QuasiNormSpec, g: GroupSpec, resolution: int = 16):
    """Nodes on the unit quasi-sphere and weights approximating sigma.

    Directions theta of the Euclidean sphere are pushed to w = rho(theta)
    theta with |w| = 1; the measure picks up rho^N / (d/dt |t w| at t=1).
    The anisotropic max norm uses its flat faces {x_i = +-1} instead, where
    sigma is nu_i times Lebesgue measure on the face.
    """
    check_compatible(q, g)
    N = g.N
    if N == 1:
        return np.array([[1.0], [-1.0]]), np.array([g.nu[0], g.nu[0]])
    if q.kind == "aniso_max":
        return _face_rule(g, resolution)
    if N == 2:
        psi, wpsi = _trapezoid_circle(4 * resolution)
        theta = np.stack([np.cos(psi), np.sin(psi)], axis=-1)
        wdir = wpsi
    else:
        nz = max(4, resolution // 2 + 2)
        npsi = max(8, resolution)
        z, wz = _gauss(nz)
        psi, wpsi = _trapezoid_circle(npsi)
        Z, P = np.meshgrid(z, psi, indexing="ij")
        sz = np.sqrt(1 - Z * Z)
        theta = np.stack([sz * np.cos(P), sz * np.sin(P), Z], axis=-1).reshape(-1, 3)
        wdir = np.outer(wz, wpsi).ravel()
    rho = ray_extent(q, g, theta)
    omega = rho[:, None] * theta
    weights = wdir * rho**N / radial_slope(q, g, omega)
    if N == 3:
        # the z-direction Gauss rule converges slowly on the gauge sphere; pin the total mass to |S|
        weights *= sphere_measure(q, g) / weights.sum()
    return omega, weights


def _face_rule(g, resolution):
    N = g.N
    panels = max(2, resolution // 8)
    edges = np.linspace(-1.0, 1.0, panels + 1)
    t, wt = gauss_on_edges(edges, 8)
    nodes, weights = [], []
    for i in range(N):
        others = [t] * (N - 1)
        grids = np.meshgrid(*others, indexing="ij")
        wgrid = np.ones_like(grids[0])
        for k, gk in enumerate(np.meshgrid(*([wt] * (N - 1)), indexing="ij")):
            wgrid = wgrid * gk
        for sgn in (1.0, -1.0):
            pts = np.empty(grids[0].shape + (N,))
            j = 0
            for k in range(N):
                if k == i:
                    pts[..., k] = sgn
                else:
                    pts[..., k] = grids[j]
                    j += 1
            nodes.append(pts.reshape(-1, N))
            weights.append((g.nu[i] * wgrid).ravel())
    return np.concatenate(nodes), np.concatenate(weights)


def fold_rule(q: QuasiNormSpec, g: GroupSpec, nodes, weights, keep_first: bool = False):
    """Collapse an angular rule onto orbits of norm-preserving automorphisms.

    Valid for integrands that see the node only through quasi-norms of
    products with it (radial u, norm-only weights).  keep_first=True uses
    only the reflections that fix the first coordinate, which is what a
    factor depending on x_1 still allows.
    """
    if keep_first:
        if g.law == "heisenberg":
            flip = nodes[:, 1] < 0
            canon = np.where(flip[:, None], nodes * np.array([1.0, -1.0, -1.0]), nodes)
        else:
            canon = np.concatenate([nodes[:, :1], np.abs(nodes[:, 1:])], axis=1)
    elif q.kind == "euclidean":
        e1 = np.zeros((1, g.N))
        e1[0, 0] = 1.0
        return e1, np.array([weights.sum()])
    elif g.law == "heisenberg":
        canon = np.stack(
            [np.hypot(nodes[:, 0], nodes[:, 1]), np.zeros(len(nodes)), np.abs(nodes[:, 2])], axis=-1
        )
    else:
        canon = np.abs(nodes)
    keys = np.round(canon, 12)
    uniq, first, inv = np.unique(keys, axis=0, return_index=True, return_inverse=True)
    w = np.zeros(len(uniq))
    np.add.at(w, inv.ravel(), weights)
    return canon[first], w


# -- Cartesian and polar integration -----------------------------------------


def _cartesian_once(f, box, panels, order, chunk=2_000_000):
    axes = []
    for lo, hi in box:
        x, w = gauss_on_edges(np.linspace(lo, hi, panels + 1), order)
        axes.append((x, w))
    N = len(box)
    x0, w0 = axes[0]
    rest = axes[1:]
    grids = np.meshgrid(*[a[0] for a in rest], indexing="ij") if rest else []
    wrest = np.ones(tuple(len(a[0]) for a in rest))
    for k, gk in enumerate(np.meshgrid(*[a[1] for a in rest], indexing="ij") if rest else []):
        wrest = wrest * gk
    tail_pts = np.stack([gk.ravel() for gk in grids], axis=-1) if rest else np.zeros((1, 0))
    wtail = wrest.ravel() if rest else np.ones(1)
    total = 0.0
    step = max(1, chunk // max(1, len(wtail)))
    for i in range(0, len(x0), step):
        xs = x0[i : i + step]
        pts = np.empty((len(xs), len(wtail), N))
        pts[..., 0] = xs[:, None]
        pts[..., 1:] = tail_pts[None]
        vals = np.asarray(f(pts), dtype=float)
        if not np.all(np.isfinite(vals)):
            idx = np.argwhere(~np.isfinite(vals))[0]
            bad = pts[tuple(idx)]
            raise NumericError(f"integrand not finite at {bad.tolist()}", point=bad)
        total += float(np.dot(w0[i : i + step], vals @ wtail))
    return total, len(x0) * len(wtail)


def _auto_box(f, N):
    L = 1.0
    for _ in range(12):
        t = np.linspace(-L, L, 41)
        grids = np.meshgrid(*([t] * N), indexing="ij")
        pts = np.stack([gk.ravel() for gk in grids], axis=-1)
        on_face = np.any(np.abs(pts) == L, axis=-1)
        vals = np.abs(np.asarray(f(pts), dtype=float))
        peak = float(np.max(vals)) if vals.size else 0.0
        if peak == 0.0 or float(np.max(vals[on_face])) <= 1e-16 * peak:
            return [(-L, L)] * N
        L *= 2.0
    raise NumericError("could not find a box outside which the integrand is negligible")


def integrate_cartesian(f, box, scheme: QuadratureScheme, N: int | None = None) -> IntegralResult:
    """Composite Gauss product rule on an axis-aligned box.

    box=None picks [-L, L]^N with L doubled until f is below 1e-16 of its
    peak on the box boundary (N must then be given).  The two-level error
    bound is only heuristic for integrands with kinks off the panel grid.
    """
    if box is None:
        if N is None:
            raise ConfigError("automatic box needs the dimension N")
        box = _auto_box(f, N)
    box = [(float(a), float(b)) for a, b in box]
    coarse, n1 = _cartesian_once(f, box, scheme.cartesian_panels, scheme.order)
    fine, n2 = _cartesian_once(f, box, 2 * scheme.cartesian_panels, scheme.order)
    return IntegralResult(fine, abs(fine - coarse), n1 + n2)


def _polar_once(f, scheme, g, q, breaks, lo, hi, head=True, tail=True):
    omega, wom = angular_rule(q, g, scheme.angular)
    Q = g.Q

    def radial(r):
        R = np.repeat(r, len(omega))
        W = np.tile(omega, (len(r), 1))
        vals = np.asarray(f(R, W), dtype=float).reshape(len(r), len(omega))
        return (vals @ wom) * r ** (Q - 1)

    value, n, _, _ = radial_integral(radial, lo, hi, breaks, scheme, head=head, tail=tail)
    return value, n * len(omega)


def _polar_pair(f, scheme, g, q, breaks, lo, hi, head=True, tail=True):
    coarse, n1 = _polar_once(f, scheme, g, q, breaks, lo, hi, head, tail)
    fine, n2 = _polar_once(f, scheme.at_level(1), g, q, breaks, lo, hi, head, tail)
    return IntegralResult(fine, abs(fine - coarse), n1 + n2)


def integrate_polar(f, scheme: QuadratureScheme, g: GroupSpec, q: QuasiNormSpec, breaks=(), r_range=(1e-6, 1e6)) -> IntegralResult:
    """Integral of f(r, w) r^(Q-1) dsigma(w) dr over 0 < r < inf.

    f receives flat arrays r (k,) and w (k, N).  Breakpoints in r become
    panel edges; ends outside r_range are closed by power-law extrapolation,
    so r_range should reach into the decaying part of f.
    """
    lo, hi = r_range
    return _polar_pair(f, scheme, g, q, breaks, lo, hi)


# -- radial cumulative tables ---------------------------------------------------


class RadialCumulative:
    """inner(r) = |S| int_0^r w t^(Q-1) dt and outer(r) = |S| int_r^inf w t^(Q-1) dt.

    The weight w(t) is radial and smooth between breakpoints.  A fixed
    log-grid over [1e-10, 1e10] * scale carries Gauss panels in log t; a query
    at arbitrary r adds one partial panel, so neither side is formed by
    subtraction.  Ends beyond the grid are power laws fitted to the two
    outermost nodes; a divergent end makes that side inf.
    """

    PANELS_PER_DECADE = 8
    ORDER = 8

    def __init__(self, w, Q: float, sphere: float, scale: float = 1.0, breaks=(), span: float = 10.0):
        self.w = w
        self.Q = float(Q)
        self.sphere = float(sphere)
        lo, hi = scale * 10.0**-span, scale * 10.0**span
        n = int(round(2 * span * self.PANELS_PER_DECADE))
        extra = [b for b in breaks if lo < b < hi]
        self.edges = np.unique(np.concatenate([np.geomspace(lo, hi, n + 1), extra]))
        self.lo, self.hi = float(self.edges[0]), float(self.edges[-1])
        self._x, self._wx = _gauss(self.ORDER)
        la, lb = np.log(self.edges[:-1]), np.log(self.edges[1:])
        t = 0.5 * (la + lb)[:, None] + 0.5 * (lb - la)[:, None] * self._x
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            vals = self._integrand_log(np.exp(t))
        bad = ~np.all(np.isfinite(vals), axis=1)
        head_lost = tail_lost = False
        if bad.any():
            # an overflowing weight only costs the side of the table it lives on
            idx = np.flatnonzero(bad)
            if idx[0] > 0 and np.all(bad[idx[0] :]):
                keep = slice(0, idx[0])
                tail_lost = True
            elif idx[-1] < len(bad) - 1 and np.all(bad[: idx[-1] + 1]):
                keep = slice(idx[-1] + 1, len(bad))
                head_lost = True
            else:
                raise NumericError("radial weight is not finite on the cumulative grid")
            if len(vals[keep]) < 2:
                raise NumericError("radial weight is not finite on the cumulative grid")
            vals, t, la, lb = vals[keep], t[keep], la[keep], lb[keep]
            self.edges = np.concatenate([np.exp(la[:1]), np.exp(lb)])
            self.lo, self.hi = float(np.exp(la[0])), float(np.exp(lb[-1]))
        panel = 0.5 * (lb - la) * (vals @ self._wx)
        self._cum = np.concatenate([[0.0], np.cumsum(panel)])
        # suffix sums keep outer() free of cancellation against the head
        self._rev = np.concatenate([np.cumsum(panel[::-1])[::-1], [0.0]])
        self.head, self.head_k = self._end(t[0, 0], vals[0, 0], t[0, 1], vals[0, 1], "head", la[0])
        self.tail, _ = self._end(t[-1, -2], vals[-1, -2], t[-1, -1], vals[-1, -1], "tail", lb[-1])
        if head_lost:
            self.head = math.inf
        if tail_lost:
            self.tail = math.inf
        self.evaluations = vals.size

    def _integrand_log(self, r):
        # t^(Q-1) dt becomes t^Q d(log t)
        w = np.asarray(self.w(r), dtype=float)
        return np.where(w == 0.0, 0.0, w * r**self.Q)

    @staticmethod
    def _end(l1, f1, l2, f2, side, edge):
        # f ~ exp(k log t) in log variables: integrable toward 0 iff k > 0, toward inf iff k < 0
        if f1 == 0.0 and f2 == 0.0:
            return 0.0, None
        if f1 <= 0.0 or f2 <= 0.0:
            return math.inf, None
        k = math.log(f2 / f1) / (l2 - l1)
        if side == "head":
            return (f1 * math.exp(k * (edge - l1)) / k, k) if k > 1e-9 else (math.inf, k)
        return (-f2 * math.exp(k * (edge - l2)) / k, k) if k < -1e-9 else (math.inf, k)

    def _partial(self, r, upper=False):
        """Panel index j with edges[j] <= r and the integral over [edges[j], r]
        (or over [r, edges[j+1]] when upper is set)."""
        j = np.clip(np.searchsorted(self.edges, r, side="right") - 1, 0, len(self.edges) - 2)
        a = np.log(r) if upper else np.log(self.edges[j])
        b = np.log(self.edges[j + 1]) if upper else np.log(r)
        half = 0.5 * (b - a)
        t = (a + half)[..., None] + half[..., None] * self._x
        return j, half * (self._integrand_log(np.exp(t)) @ self._wx)

    def _check(self, r):
        r = np.asarray(r, dtype=float)
        if np.any(r <= self.lo) or np.any(r >= self.hi):
            raise NumericError(f"radius outside the cumulative table [{self.lo:g}, {self.hi:g}]")
        return r

    def inner(self, r):
        r = self._check(r)
        j, part = self._partial(r)
        return self.sphere * (self.head + self._cum[j] + part)

    def outer(self, r):
        r = self._check(r)
        j, part = self._partial(r, upper=True)
        return self.sphere * (self._rev[j + 1] + part + self.tail)


def ball_integral(w, radius, scheme: QuadratureScheme, g: GroupSpec, q: QuasiNormSpec, radial: bool = False):
    """Integral of w over B(0, radius); radial=True means w takes |y|."""
    return _region_integral(w, radius, scheme, g, q, radial, inside=True)


def complement_integral(w, radius, scheme: QuadratureScheme, g: GroupSpec, q: QuasiNormSpec, radial: bool = False):
    """Integral of w over the complement of B(0, radius)."""
    return _region_integral(w, radius, scheme, g, q, radial, inside=False)


def _region_integral(w, radius, scheme, g, q, radial, inside):
    if not radius > 0:
        raise ConfigError("radius must be positive")
    if radial:
        vals = []
        for span in (8.0, 10.0):
            cum = RadialCumulative(w, g.Q, sphere_measure(q, g), scale=radius, span=span)
            v = float(cum.inner(radius) if inside else cum.outer(radius))
            vals.append((v, cum.evaluations))
        (v0, n0), (v1, n1) = vals
        if math.isinf(v1):
            raise NumericError("divergent region integral", partial=v1)
        return IntegralResult(v1, abs(v1 - v0), n0 + n1)

    def f(r, omega):
        return w(dilate(g, r, omega))

    if inside:
        return _polar_pair(f, scheme, g, q, (), radius * 1e-6, radius, tail=False)
    return _polar_pair(f, scheme, g, q, (), radius, radius * 1e6, head=False)


# -- the singular double integral -------------------------------------------------


def _ends_vec(r, vals, p_floor, tail_k, lo, hi):
    """Vectorised power-law head (floored exponent) and tail (fallback exponent)."""
    f1, f2 = vals[:, 0], vals[:, 1]
    with np.errstate(divide="ignore", invalid="ignore"):
        k = np.log(f2 / f1) / math.log(r[1] / r[0])
    k = np.where((f1 > 0) & (f2 > 0), k, p_floor)
    k = np.maximum(np.nan_to_num(k, nan=p_floor), p_floor)
    head = np.where((f1 == 0) & (f2 == 0), 0.0, f1 * (lo / r[0]) ** k * lo / (k + 1.0))
    g1, g2 = vals[:, -2], vals[:, -1]
    with np.errstate(divide="ignore", invalid="ignore"):
        kt = np.log(g2 / g1) / math.log(r[-1] / r[-2])
    kt = np.where((g1 > 0) & (g2 > 0) & (kt < -1.0), kt, tail_k)
    tail = g2 * (hi / r[-1]) ** kt * hi / (-1.0 - kt)
    return head, tail


def _variation_bound(u, g, q):
    """(L, e): |u(y w) - u(y)| <= L |w|^e for |w| <= 1 near the support.

    The built-in gauges obey ||y w| - |y|| <= c |w| with c the certified
    triangle constant when every nu_i >= 1; the angular factor x_1/|x| moves
    by at most 2|w|/|x| because |w_1| <= |w|.
    """
    feat = u.support[0] if u.support[0] > 0 else u.breakpoints[0]
    c = certified_ctri(q, g)
    e = min(1.0, min(g.nu))
    eps = abs(u.angular_mod)
    phi_sup = u.sup_abs() / (1.0 + eps)
    L = c * u.lipschitz_profile() * (1.0 + eps) + 2.0 * c * phi_sup * eps / feat
    return L, e


def gagliardo_outer(u, p: float, s: float, a, scheme: QuadratureScheme, g: GroupSpec, q: QuasiNormSpec, outer_fn=None):
    """Refined evaluation of int_G F(inner(y), |y|) dy, where

        inner(y) = int_G |u(y w) - u(y)|^p a(|y w|, |y|, |w|) / |w|^(Q+sp) dw.

    F defaults to the identity, giving the Gagliardo double integral.
    Levels are refined until the disagreement of the last two (plus the
    analytic bound for the excluded r < r_min core) is within scheme.rtol,
    or the evaluation budget runs out.
    """
    if p <= 1.0:
        raise ConfigError("p>1 required")
    if s >= 1.0:
        raise ConfigError("divergent seminorm: s >= 1 makes the diagonal singularity non-integrable")
    if not u.lipschitz_admissible:
        raise ConfigError(f"divergent seminorm: profile {u.kind!r} is not Lipschitz")
    if u.support[0] <= 0 and not u.radial:
        raise ConfigError("non-radial test functions must vanish near the origin")
    results = []
    spent = 0
    level = 0
    while True:
        sch = scheme.at_level(level)
        cost = _estimate_cost(u, sch, g, q)
        if results and spent + cost > scheme.budget:
            v, core = results[-1]
            err = core + (abs(v - results[-2][0]) if len(results) > 1 else abs(v))
            raise NumericError(
                f"budget of {scheme.budget} evaluations exhausted before level {level}",
                partial=IntegralResult(v, err, spent),
            )
        v, core, n = _gagliardo_level(u, p, s, a, sch, g, q, outer_fn)
        spent += n
        results.append((v, core))
        if len(results) >= 2:
            err = abs(v - results[-2][0]) + core
            if err <= scheme.rtol * abs(v) or (v == 0.0 and err == 0.0):
                return IntegralResult(v, err, spent)
            if level >= scheme.max_level:
                raise NumericError(
                    f"no convergence to rtol={scheme.rtol} by level {level}",
                    partial=IntegralResult(v, err, spent),
                )
        level += 1


def _outer_nodes(u, q, g, sch):
    omega, wom = angular_rule(q, g, sch.angular)
    eta, weta = fold_rule(q, g, omega, wom, keep_first=not u.radial)
    return omega, wom, eta, weta


def _rho_range(u, sch):
    feat = u.support[0] if u.support[0] > 0 else u.breakpoints[0]
    return 1e-3 * feat, sch.r_max_factor * u.support[1]


def _estimate_cost(u, sch, g, q):
    omega, _, eta, _ = _outer_nodes(u, q, g, sch)
    lo, hi = _rho_range(u, sch)
    n_rho = (len(graded_edges(lo, hi, u.breakpoints, sch.per_decade, OUTER_DEPTH + sch.grade_depth, ratio=0.25)) - 1) * sch.order
    n_r = n_rho + 2 * len(u.breakpoints) * (sch.grade_depth + 2) * sch.order
    return len(eta) * len(omega) * n_rho * n_r


OUTER_DEPTH = 3


def _gagliardo_level(u, p, s, a, sch, g, q, outer_fn, chunk=3_000_000):
    Q, sp = g.Q, s * p
    omega, wom, eta, weta = _outer_nodes(u, q, g, sch)
    sphere = float(np.sum(wom))
    feat = u.support[0] if u.support[0] > 0 else u.breakpoints[0]
    R = u.support[1]
    L, e = _variation_bound(u, g, q)
    expo = p * e - sp
    if expo <= 0:
        raise ConfigError("divergent seminorm: p*min(1, nu_min) <= s*p")
    # push r_min down until the analytic core bound is far below rtol
    r_min = feat * min(sch.r_min_factor, (1e-3 * sch.rtol) ** (1.0 / expo))
    core_unit = L**p * sphere * r_min**expo / expo
    rho_lo, rho_hi = _rho_range(u, sch)
    rho_edges = graded_edges(rho_lo, rho_hi, u.breakpoints, sch.per_decade, OUTER_DEPTH + sch.grade_depth, ratio=0.25)
    rho, wrho = gauss_on_edges(rho_edges, sch.order)
    outer_vals = np.zeros(len(rho))
    core_vals = np.zeros(len(rho))
    evals = 0
    for k, rk in enumerate(rho):
        y = dilate(g, np.full(len(eta), rk), eta)
        uy = u.evaluate(g, q, y)
        brk = [abs(rk - b) for b in u.breakpoints] + [rk + b for b in u.breakpoints]
        edges = graded_edges(r_min, sch.r_max_factor * (R + rk), [b for b in brk if b > r_min], sch.per_decade, sch.grade_depth)
        r, wr = log_gauss_on_edges(edges, sch.order)
        w = dilate(g, r[:, None], omega[None, :, :])
        rw = r ** (-1.0 - sp)
        inner = np.empty(len(eta))
        step = max(1, chunk // (len(r) * len(omega)))
        for i0 in range(0, len(eta), step):
            ys = y[i0 : i0 + step]
            parts = product_parts(g, ys[:, None, None, :], w[None])
            nx = qnorm_parts(q, g, parts)
            diff = np.abs(u.evaluate_parts(g, nx, parts[0]) - uy[i0 : i0 + step, None, None]) ** p
            if a is not None:
                diff = diff * a(nx, np.full_like(nx, rk), np.broadcast_to(r[None, :, None], nx.shape))
            evals += diff.size
            vals = (diff @ wom) * rw
            head, tail = _ends_vec(r, vals, p * e - 1.0 - sp, -1.0 - sp, edges[0], edges[-1])
            inner[i0 : i0 + step] = vals @ wr + head + tail
        if not np.all(np.isfinite(inner)):
            raise NumericError(f"inner integral not finite at |y|={rk!r}", point=rk)
        near = feat * (1 - 1e-9) - 4 * r_min <= rk <= R + 4 * r_min
        core = core_unit if near else 0.0
        if a is not None and near:
            x0 = group_mul(g, y[:, None, :], w[None, 0])
            n0 = qnorm(q, g, x0)
            core *= float(np.max(a(n0, np.full_like(n0, rk), np.full_like(n0, r[0]))))
        if outer_fn is not None:
            hi = outer_fn(inner + core, rk)
            inner = outer_fn(inner, rk)
            core_vals[k] = float(np.dot(hi - inner, weta))
        else:
            core_vals[k] = core * float(np.sum(weta))
        outer_vals[k] = float(np.dot(inner, weta))
    jac = rho ** (Q - 1)
    outer_vals *= jac
    core_vals *= jac
    total = float(np.dot(outer_vals, wrho))
    h, _ = _power_end(rho[0], outer_vals[0], rho[1], outer_vals[1], "head", rho_edges[0])
    t, _ = _power_end(rho[-2], outer_vals[-2], rho[-1], outer_vals[-1], "tail", rho_edges[-1])
    if not (math.isfinite(h) and math.isfinite(t)):
        raise NumericError("outer integral over y does not converge", partial=total)
    return total + h + t, float(np.dot(core_vals, wrho)), evals


def integrate_gagliardo(u, p, s, weight_a, scheme: QuadratureScheme, g: GroupSpec, q: QuasiNormSpec) -> IntegralResult:
    """int int |u(x) - u(y)|^p a(x, y) / |y^-1 x|^(Q+sp) dx dy.

    weight_a is None (a = 1) or a callable of (|x|, |y|, |y^-1 x|).
    Constant u gives exactly 0.
    """
    return gagliardo_outer(u, p, s, weight_a, scheme, g, q)
