"""Concrete homogeneous Lie groups, their dilations and quasi-norms.

Two families are built in: abelian ``R^N`` (N <= 3) with arbitrary positive
dilation weights, and the first Heisenberg group ``H^1 = R^3`` with law

    x . y = (x1 + y1, x2 + y2, x3 + y3 + (x1*y2 - x2*y1) / 2)

and dilations ``(l x1, l x2, l^2 x3)``.  Points are numpy arrays whose last
axis has length N; every function broadcasts over the leading axes.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConfigError, InputError, NumericError

LAWS = ("abelian", "heisenberg")
KINDS = ("euclidean", "aniso_max", "aniso_smooth", "koranyi")
_MAX_SMOOTH_M = 12


@dataclass(frozen=True)
class GroupSpec:
    N: int
    nu: tuple
    law: str = "abelian"

    def __post_init__(self):
        nu = tuple(float(v) for v in self.nu)
        object.__setattr__(self, "nu", nu)
        if self.law not in LAWS:
            raise ConfigError(f"unknown group law {self.law!r}; expected one of {LAWS}")
        if not 1 <= self.N <= 3 or len(nu) != self.N:
            raise ConfigError(f"need 1 <= N <= 3 and len(nu) == N, got N={self.N}, nu={nu}")
        if any(not (v > 0 and math.isfinite(v)) for v in nu):
            raise ConfigError(f"dilation weights must be positive and finite, got {nu}")
        if self.law == "heisenberg" and (self.N != 3 or nu != (1.0, 1.0, 2.0)):
            raise ConfigError("heisenberg law requires N = 3 and nu = (1, 1, 2)")

    @property
    def Q(self) -> float:
        """Homogeneous dimension, the sum of the dilation weights."""
        return float(sum(self.nu))

    @property
    def nu_array(self) -> np.ndarray:
        return np.asarray(self.nu)


@dataclass(frozen=True)
class QuasiNormSpec:
    kind: str

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown quasi-norm kind {self.kind!r}; expected one of {KINDS}")


def abelian(nu) -> GroupSpec:
    nu = tuple(nu)
    return GroupSpec(len(nu), nu, "abelian")


def heisenberg() -> GroupSpec:
    return GroupSpec(3, (1, 1, 2), "heisenberg")


def _as_points(g: GroupSpec, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 0 or x.shape[-1] != g.N:
        raise InputError(f"points must have last axis of length N={g.N}, got shape {x.shape}")
    return x


def check_compatible(q: QuasiNormSpec, g: GroupSpec) -> None:
    if q.kind == "koranyi" and g.law != "heisenberg":
        raise ConfigError("the koranyi gauge is only defined on the heisenberg group")
    if q.kind != "koranyi" and g.law == "heisenberg":
        raise ConfigError(f"quasi-norm {q.kind!r} is not supported on the heisenberg group")
    if q.kind == "euclidean" and any(v != 1.0 for v in g.nu):
        raise ConfigError("the euclidean norm is homogeneous only when every nu_i = 1")
    if q.kind == "aniso_smooth":
        smooth_exponent(g)


def smooth_exponent(g: GroupSpec) -> int:
    """Smallest M <= 12 making every 2M/nu_i an even integer."""
    for M in range(1, _MAX_SMOOTH_M + 1):
        if all(abs(M / v - round(M / v)) < 1e-12 for v in g.nu):
            return M
    raise ConfigError(f"no M <= {_MAX_SMOOTH_M} makes 2M/nu_i even integers for nu={g.nu}")


def group_mul(g: GroupSpec, x, y) -> np.ndarray:
    x = _as_points(g, x)
    y = _as_points(g, y)
    out = x + y
    if g.law == "heisenberg":
        out[..., 2] += 0.5 * (x[..., 0] * y[..., 1] - x[..., 1] * y[..., 0])
    return out


def group_inv(g: GroupSpec, x) -> np.ndarray:
    # the twist is antisymmetric, so -x is the inverse for both laws
    return -_as_points(g, x)


def dilate(g: GroupSpec, lam, x) -> np.ndarray:
    x = _as_points(g, x)
    lam = np.asarray(lam, dtype=float)
    if np.any(~(lam > 0)):
        raise InputError(f"dilation parameter must be positive, got {lam}")
    return x * lam[..., None] ** g.nu_array


def qnorm(q: QuasiNormSpec, g: GroupSpec, x) -> np.ndarray:
    check_compatible(q, g)
    x = _as_points(g, x)
    return qnorm_parts(q, g, [x[..., i] for i in range(g.N)])


def qnorm_parts(q: QuasiNormSpec, g: GroupSpec, parts) -> np.ndarray:
    """Quasi-norm from a list of N coordinate arrays (saves stacking large batches)."""
    if q.kind == "euclidean":
        return np.sqrt(sum(c * c for c in parts))
    if q.kind == "koranyi":
        rho2 = parts[0] * parts[0] + parts[1] * parts[1]
        return np.sqrt(np.sqrt(rho2 * rho2 + parts[2] * parts[2]))
    comps = [np.abs(c) ** (1.0 / v) if v != 1.0 else np.abs(c) for c, v in zip(parts, g.nu)]
    m = comps[0]
    for c in comps[1:]:
        m = np.maximum(m, c)
    if q.kind == "aniso_max":
        return m
    M = smooth_exponent(g)
    safe = np.where(m > 0, m, 1.0)
    acc = sum((c / safe) ** (2 * M) for c in comps)
    return np.where(m > 0, m * acc ** (1.0 / (2 * M)), 0.0)


def product_parts(g: GroupSpec, y, w):
    """Coordinates of y . w as a list of arrays, broadcasting y against w."""
    y = _as_points(g, y)
    w = _as_points(g, w)
    parts = [y[..., i] + w[..., i] for i in range(g.N)]
    if g.law == "heisenberg":
        parts[2] = parts[2] + 0.5 * (y[..., 0] * w[..., 1] - y[..., 1] * w[..., 0])
    return parts


def radial_slope(q: QuasiNormSpec, g: GroupSpec, omega) -> np.ndarray:
    """Derivative of t -> |t*omega| at t = 1 for omega on the unit quasi-sphere."""
    omega = _as_points(g, omega)
    if q.kind == "euclidean":
        return np.ones(omega.shape[:-1])
    if q.kind == "koranyi":
        rho2 = omega[..., 0] ** 2 + omega[..., 1] ** 2
        return rho2 * rho2 + 0.5 * omega[..., 2] ** 2
    comps = np.abs(omega) ** (1.0 / g.nu_array)
    if q.kind == "aniso_max":
        idx = np.argmax(comps, axis=-1)
        return 1.0 / g.nu_array[idx]
    M = smooth_exponent(g)
    return np.sum(comps ** (2 * M) / g.nu_array, axis=-1)


def ray_extent(q: QuasiNormSpec, g: GroupSpec, theta) -> np.ndarray:
    """Euclidean length t with |t*theta| = 1 for unit Euclidean directions theta."""
    theta = _as_points(g, theta)
    if q.kind == "euclidean":
        return 1.0 / np.sqrt(np.sum(theta * theta, axis=-1))
    if q.kind == "koranyi":
        a = (theta[..., 0] ** 2 + theta[..., 1] ** 2) ** 2
        b = theta[..., 2] ** 2
        return np.sqrt(2.0 / (b + np.sqrt(b * b + 4.0 * a)))
    if q.kind == "aniso_max":
        return 1.0 / np.max(np.abs(theta), axis=-1)
    return _bisect_extent(lambda t: qnorm(q, g, t[..., None] * theta), theta.shape[:-1], 1.0 / np.max(np.abs(theta), axis=-1))


def _bisect_extent(norm_of_t, shape, hi) -> np.ndarray:
    # |t theta| is increasing in t; |hi*theta| >= 1 holds for every built-in ball inside [-1,1]^N
    lo = np.zeros(shape)
    hi = np.broadcast_to(np.asarray(hi, dtype=float), shape).copy()
    for _ in range(64):
        mid = 0.5 * (lo + hi)
        inside = norm_of_t(mid) < 1.0
        lo = np.where(inside, mid, lo)
        hi = np.where(inside, hi, mid)
    return 0.5 * (lo + hi)


def angular_projection(q: QuasiNormSpec, g: GroupSpec, x):
    """Return (|x|, omega) with x = D_|x|(omega) and |omega| = 1 (omega = 0 at the origin)."""
    x = _as_points(g, x)
    r = qnorm(q, g, x)
    safe = np.where(r > 0, r, 1.0)
    omega = x * safe[..., None] ** (-g.nu_array)
    return r, np.where((r > 0)[..., None], omega, 0.0)


def certified_ctri(q: QuasiNormSpec, g: GroupSpec) -> float:
    """A proven constant C with |x y| <= C (|x| + |y|).

    Euclidean and Korányi gauges are genuine norms.  For the anisotropic max
    norm, |a+b|^(1/nu) <= (|x|^nu + |y|^nu)^(1/nu) <= |x| + |y| when nu >= 1,
    and <= 2^(1/nu - 1)(|x| + |y|) otherwise.  The smooth variant is within a
    factor N^(1/2M) of the max norm on both sides.
    """
    check_compatible(q, g)
    if q.kind in ("euclidean", "koranyi"):
        return 1.0
    c_max = max(1.0, 2.0 ** (1.0 / min(g.nu) - 1.0))
    if q.kind == "aniso_max":
        return c_max
    return c_max * g.N ** (1.0 / (2 * smooth_exponent(g)))


def random_sphere_points(q: QuasiNormSpec, g: GroupSpec, n: int, rng) -> np.ndarray:
    theta = rng.standard_normal((n, g.N))
    _, omega = angular_projection(q, g, theta)
    return omega


def estimate_ctri(q: QuasiNormSpec, g: GroupSpec, samples: int = 100_000, seed=0) -> float:
    """Sampled lower bound for the quasi-triangle constant.

    Pairs are drawn as D_r(omega) with log-uniform r in [0.01, 100] and
    omega uniform in Gaussian direction, then projected to the unit sphere.
    """
    if samples < 1:
        raise InputError("samples must be >= 1")
    check_compatible(q, g)
    rng = np.random.default_rng(seed)
    best = 0.0
    done = 0
    while done < samples:
        n = min(100_000, samples - done)
        pts = []
        for _ in range(2):
            r = np.exp(rng.uniform(math.log(0.01), math.log(100.0), n))
            pts.append(dilate(g, r, random_sphere_points(q, g, n, rng)))
        x, y = pts
        ratio = qnorm(q, g, group_mul(g, x, y)) / (qnorm(q, g, x) + qnorm(q, g, y))
        best = max(best, float(np.max(ratio)))
        done += n
    return best


_sphere_lock = threading.Lock()


def sphere_measure(q: QuasiNormSpec, g: GroupSpec) -> float:
    """|S| = Q * |B(0, 1)|, with the ball volume from iterated Cartesian quadrature."""
    check_compatible(q, g)
    with _sphere_lock:
        return _sphere_measure_cached(q, g)


@lru_cache(maxsize=None)
def _sphere_measure_cached(q: QuasiNormSpec, g: GroupSpec) -> float:
    coarse = unit_ball_volume(q, g, 48)
    fine = unit_ball_volume(q, g, 96)
    if abs(fine - coarse) > 1e-9 * fine:
        raise NumericError(
            f"unit ball volume not converged for {q.kind}: {coarse!r} vs {fine!r}",
            partial=fine,
        )
    return g.Q * fine


def unit_ball_volume(q: QuasiNormSpec, g: GroupSpec, n: int) -> float:
    """Lebesgue volume of {|x| < 1} over its bounding box [-1, 1]^N.

    Every built-in gauge is increasing in each |x_k|, so the section along
    axis k (other later coordinates zero) is a symmetric interval whose
    half-length is found by bisection.  Each axis is integrated with the
    substitution t = e*sin(phi), which absorbs the square-root edge of the
    section lengths, and Gauss-Legendre in phi.
    """
    xg, wg = np.polynomial.legendre.leggauss(n)
    phi = 0.5 * np.pi * xg
    wphi = 0.5 * np.pi * wg

    def half_length(prefix: np.ndarray) -> np.ndarray:
        k = prefix.shape[-1]

        def norm_of_t(t):
            pts = np.zeros(t.shape + (g.N,))
            pts[..., :k] = prefix
            pts[..., k] = t
            return qnorm(q, g, pts)

        return _bisect_extent(norm_of_t, prefix.shape[:-1], 1.0)

    def level(prefix: np.ndarray) -> np.ndarray:
        e = half_length(prefix)
        if prefix.shape[-1] == g.N - 1:
            return 2.0 * e
        t = e[..., None] * np.sin(phi)
        jac = e[..., None] * np.cos(phi) * wphi
        nxt = np.concatenate([np.broadcast_to(prefix[..., None, :], t.shape + prefix.shape[-1:]), t[..., None]], axis=-1)
        return np.sum(level(nxt) * jac, axis=-1)

    return float(level(np.zeros((0,))))
