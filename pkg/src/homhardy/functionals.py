"""Left- and right-hand sides of the inequalities.

Test functions factor as u(D_r w) = phi(r) f(w) with f = 1 + eps*w_1, so
every weighted L^p quantity splits into an angular moment int_S |f|^p dsigma
times a one-dimensional radial integral.  Only the Gagliardo-type terms need
the full group structure; they go through quadrature.gagliardo_outer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import ConfigError, DomainError
from .group_core import GroupSpec, QuasiNormSpec, qnorm, sphere_measure
from .profiles import TestFunction
from .quadrature import (
    IntegralResult,
    QuadratureScheme,
    RadialCumulative,
    angular_rule,
    gagliardo_outer,
    radial_integral,
)
from .weights import WeightExpr, parse_weight

__all__ = [
    "TestFunction",
    "DerivedWeights",
    "frac_A",
    "weight_A_frac",
    "weight_C",
    "hs_weights",
    "weight_A_hs",
    "angular_moment",
    "radial_lp",
    "weighted_lhs",
    "gagliardo",
    "nested_hs_rhs",
    "entropy_term",
    "radial_derivative_norm",
]


@dataclass(frozen=True)
class DerivedWeights:
    """Radial closures r -> A(r), C(r) (C only for the Hardy-Sobolev family)."""

    A: object
    C_of_r: object = None
    A_constant: float | None = None


def _ball_volume(r, g, q):
    return sphere_measure(q, g) * np.asarray(r, dtype=float) ** g.Q / g.Q


def _conj(p):
    return p / (p - 1.0)


# -- derived weights ---------------------------------------------------------


def frac_A(a: WeightExpr, p: float, g: GroupSpec, q: QuasiNormSpec, scale: float = 1.0) -> DerivedWeights:
    """A(x) = (|B(0,|x|)|^-1 int_B a(x, y)^(1-p') dy)^(1-p) as a radial closure.

    a must factor as F(|x|) K(|y|) |y^-1 x|^e; with e != 0 this is only radial
    for the Euclidean norm, where the ball average scales out exactly.
    """
    a = parse_weight(a)
    if p <= 1:
        raise ConfigError("p>1 required")
    if a.is_constant:
        lam = a.const
        return DerivedWeights(lambda r: np.full(np.shape(r), lam), A_constant=lam)
    F, K, e = a.split()
    m = 1.0 - _conj(p)
    if e != 0.0:
        if q.kind != "euclidean":
            raise ConfigError(
                "a(x,y) depending on |y^-1 x| gives a non-radial A unless the norm is euclidean; "
                "the supremum over points is not supported"
            )
        if K.gauss_coef["x"] != 0:
            raise ConfigError("with a |y^-1 x| factor the |y| part of a must be a pure power")
        ky = K.power["x"]
        Kc = _unit_ball_kernel(ky * m, e * m, g.N)
        vol1 = _ball_volume(1.0, g, q)

        def A(r):
            r = np.asarray(r, dtype=float)
            avg = Kc * r ** ((ky + e) * m) / vol1
            return F(r) * avg ** (1.0 - p)

        return DerivedWeights(A)
    Km = lambda r: K(r) ** m  # noqa: E731
    cum = RadialCumulative(Km, g.Q, sphere_measure(q, g), scale=scale)
    if math.isinf(cum.head):
        raise DomainError("ball average of a^(1-p') diverges at the origin for every x")

    def A(r):
        r = np.asarray(r, dtype=float)
        avg = cum.inner(r) / _ball_volume(r, g, q)
        if np.any(~(avg > 0)) or np.any(~np.isfinite(avg)):
            bad = np.ravel(r)[np.argmax(np.ravel(~(avg > 0) | ~np.isfinite(avg)))]
            raise DomainError(f"ball average of a^(1-p') is zero or infinite at |x|={bad!r}")
        return F(r) * avg ** (1.0 - p)

    return DerivedWeights(A)


def _unit_ball_kernel(alpha, beta, N):
    """int_{|y|<1} |y|^alpha |e_1 - y|^beta dy in Euclidean R^N."""
    if alpha <= -N or beta <= -min(N, 1) * (1 if N == 1 else N):
        raise DomainError(f"ball kernel diverges for exponents ({alpha}, {beta}) in dimension {N}")
    scheme = QuadratureScheme()
    if N == 1:
        left, _, _, _ = radial_integral(lambda t: t**alpha * (1 + t) ** beta, 1e-8, 1.0, (), scheme, tail=False)
        return float(special.beta(alpha + 1, beta + 1)) + left

    def shell(t):
        if N == 2:
            z = 4 * t / (1 + t) ** 2
            ang = 2 * np.pi * (1 + t) ** beta * special.hyp2f1(-beta / 2, 0.5, 1.0, z)
        elif abs(beta + 2) > 1e-12:
            ang = 2 * np.pi / (t * (beta + 2)) * ((1 + t) ** (beta + 2) - np.abs(1 - t) ** (beta + 2))
        else:
            ang = 2 * np.pi / t * (np.log1p(t) - np.log(np.abs(1 - t)))
        return ang * t ** (alpha + N - 1)

    edges_hi = 1.0 - 1e-12
    val, _, _, _ = radial_integral(shell, 1e-8, edges_hi, (0.5, 0.9, 0.99, 0.999), scheme, tail=False)
    return val


def weight_A_frac(a, x, p, scheme: QuadratureScheme, g: GroupSpec, q: QuasiNormSpec):
    """A(x) for points x (array (..., N)); a constant a returns that constant exactly."""
    return frac_A(a, p, g, q).A(qnorm(q, g, x))


def weight_C(v, r, scheme: QuadratureScheme, g: GroupSpec, q: QuasiNormSpec):
    """C(|x|) = int_{B(0,|x|)} v(y) dy for radial v."""
    v = parse_weight(v)
    if v.is_constant:
        return v.const * _ball_volume(r, g, q)
    cum = RadialCumulative(v.radial(), g.Q, sphere_measure(q, g))
    return cum.inner(r)


def hs_weights(v, z, p: float, qexp: float, g: GroupSpec, q: QuasiNormSpec) -> DerivedWeights:
    """A and C of the Hardy-Sobolev family as radial closures.

    A(x) = (avg_B (v^p / z)^(1/(p-1)))^(-q/p') (C(|x|)/|B|)^q v(x).
    """
    v, z = parse_weight(v), parse_weight(z)
    vr, zr = v.radial(), z.radial()
    if p <= 1:
        raise ConfigError("p>1 required")
    pc = _conj(p)
    sphere = sphere_measure(q, g)
    if v.is_constant and z.is_constant:
        cv, cz = v.const, z.const
        Aval = (cv**p / cz) ** (1.0 / (p - 1.0) * (-qexp / pc)) * cv**qexp * cv
        return DerivedWeights(
            lambda r: np.full(np.shape(r), Aval),
            lambda r: cv * _ball_volume(r, g, q),
            A_constant=Aval,
        )
    cumC = RadialCumulative(vr, g.Q, sphere)
    cumB = RadialCumulative(lambda r: (vr(r) ** p / zr(r)) ** (1.0 / (p - 1.0)), g.Q, sphere)
    if math.isinf(cumC.head) or math.isinf(cumB.head):
        raise DomainError("a ball integral defining A or C diverges at the origin")

    def C(r):
        return cumC.inner(r)

    def A(r):
        r = np.asarray(r, dtype=float)
        vol = _ball_volume(r, g, q)
        avg = cumB.inner(r) / vol
        if np.any(~(avg > 0)):
            raise DomainError("ball average of (v^p/z)^(1/(p-1)) vanishes")
        return avg ** (-qexp / pc) * (C(r) / vol) ** qexp * vr(r)

    return DerivedWeights(A, C)


def weight_A_hs(v, z, x, p, qexp, scheme: QuadratureScheme, g: GroupSpec, q: QuasiNormSpec):
    return hs_weights(v, z, p, qexp, g, q).A(qnorm(q, g, x))


# -- weighted L^p quantities ---------------------------------------------------


def angular_moment(u: TestFunction, power: float, g: GroupSpec, q: QuasiNormSpec, resolution: int = 16):
    """int_S |1 + eps w_1|^power dsigma (equal to |S| for radial u)."""
    if u.radial:
        return sphere_measure(q, g)
    omega, w = angular_rule(q, g, resolution)
    return float(np.dot(np.abs(u.angular_factor(omega)) ** power, w))


def _moment_pair(u, power, g, q, scheme):
    m0 = angular_moment(u, power, g, q, scheme.angular)
    m1 = angular_moment(u, power, g, q, scheme.at_level(1).angular)
    return m1, abs(m1 - m0)


def _radial_pair(fun, lo, hi, breaks, scheme, head=True, tail=True):
    """Two-level 1-D radial integral: (value, difference, evaluations)."""
    out = []
    for lev in (0, 1):
        v, n, _, _ = radial_integral(fun, lo, hi, breaks, scheme.at_level(lev), head=head, tail=tail)
        out.append((v, n))
    return out[1][0], abs(out[1][0] - out[0][0]), out[0][1] + out[1][1]


def _support_range(u):
    b = u.breakpoints
    inner, outer = u.support
    lo = (inner if inner > 0 else b[0]) * 1e-6
    return lo, outer


def radial_lp(u: TestFunction, power: float, weight, g: GroupSpec, q: QuasiNormSpec, scheme: QuadratureScheme) -> IntegralResult:
    """int_G weight(|x|) |u(x)|^power dx."""
    lo, hi = _support_range(u)
    Q = g.Q

    def fun(r):
        return weight(r) * np.abs(u.profile(r)) ** power * r ** (Q - 1)

    val, err, n = _radial_pair(fun, lo, hi * (1 - 1e-15), u.breakpoints, scheme, tail=False)
    m, merr = _moment_pair(u, power, g, q, scheme)
    return IntegralResult(m * val, m * err + merr * abs(val), n)


def weighted_lhs(u: TestFunction, A, s: float, p: float, scheme: QuadratureScheme, g: GroupSpec, q: QuasiNormSpec) -> IntegralResult:
    """int_G A(x) |u(x)|^p / |x|^(sp) dx for a radial closure A."""
    Afun = A if callable(A) else (lambda r, c=float(A): np.full(np.shape(r), c))
    return radial_lp(u, p, lambda r: Afun(r) * r ** (-s * p), g, q, scheme)


# -- Gagliardo-type double integrals -----------------------------------------


def _norm_weight(a):
    if a is None:
        return None
    a = parse_weight(a)
    if a.is_constant and a.const == 1.0:
        return None
    return lambda nx, ny, nd: a(nx, ny, nd)


def gagliardo(u: TestFunction, p: float, s: float, a, scheme: QuadratureScheme, g: GroupSpec, q: QuasiNormSpec) -> IntegralResult:
    """int int |u(x) - u(y)|^p a(x, y) / |y^-1 x|^(Q+sp) dx dy (a = None or an expression)."""
    if u.scale == 0.0:
        return IntegralResult(0.0, 0.0, 0)
    return gagliardo_outer(u, p, s, _norm_weight(a), scheme, g, q)


def nested_hs_rhs(u: TestFunction, z, v, p: float, qexp: float, s: float, scheme: QuadratureScheme, g: GroupSpec, q: QuasiNormSpec) -> IntegralResult:
    """(int_G (int_G |u(x)-u(y)|^p z(x) / |y^-1 x|^(Q+sp) dx)^(q/p) v(y) dy)^(1/q)."""
    if u.scale == 0.0:
        return IntegralResult(0.0, 0.0, 0)
    z, v = parse_weight(z), parse_weight(v)
    zr, vr = z.radial(), v.radial()
    a = None if (z.is_constant and z.const == 1.0) else (lambda nx, ny, nd: zr(nx))
    ratio = qexp / p

    def outer(inner, rho):
        return np.maximum(inner, 0.0) ** ratio * float(vr(np.asarray(rho)))

    return gagliardo_outer(u, p, s, a, scheme, g, q, outer_fn=outer).root(qexp)


# -- entropy and radial derivative -------------------------------------------


def entropy_term(u: TestFunction, weight, s: float, p: float, scheme: QuadratureScheme, g: GroupSpec, q: QuasiNormSpec) -> IntegralResult:
    """int (w^p / ||w||_p^p) log(w^p / ||w||_p^p) dx with w = weight(|x|) |u| / |x|^s.

    t log t is extended by 0 at t = 0.  weight=None means 1.
    """
    wfun = (lambda r: np.ones_like(r)) if weight is None else weight
    lo, hi = _support_range(u)
    Q = g.Q

    def psi_p(r):
        return (wfun(r) * np.abs(u.profile(r)) * r ** (-s)) ** p

    def z_int(r):
        return psi_p(r) * r ** (Q - 1)

    def ent_int(r):
        t = psi_p(r)
        with np.errstate(divide="ignore", invalid="ignore"):
            lt = np.where(t > 0, t * np.log(np.where(t > 0, t, 1.0)), 0.0)
        return lt * r ** (Q - 1)

    Zr, Zr_err, n1 = _radial_pair(z_int, lo, hi * (1 - 1e-15), u.breakpoints, scheme, tail=False)
    Er, Er_err, n2 = _radial_pair(ent_int, lo, hi * (1 - 1e-15), u.breakpoints, scheme, tail=False)
    if Zr <= 0:
        raise DomainError("entropy undefined: ||w||_p = 0")
    Mp, Mp_err = _moment_pair(u, p, g, q, scheme)
    # angular part: int f^p log f^p dsigma with f = |1 + eps w_1|
    if u.radial:
        Lf, Lf_err = 0.0, 0.0
    else:
        vals = []
        for res in (scheme.angular, scheme.at_level(1).angular):
            om, w = angular_rule(q, g, res)
            fp = np.abs(u.angular_factor(om)) ** p
            vals.append(float(np.dot(fp * np.log(fp), w)))
        Lf, Lf_err = vals[1], abs(vals[1] - vals[0])
    Z = Mp * Zr
    value = (Mp * Er + Zr * Lf) / Z - math.log(Z)
    # first-order propagation of the two-level differences
    err = (Mp * Er_err + Zr * Lf_err + Mp_err * abs(Er) + Zr_err * abs(Lf)) / Z
    err += (abs(Mp * Er + Zr * Lf) / Z + 1.0) * (Mp * Zr_err + Zr * Mp_err) / Z
    return IntegralResult(value, err, n1 + n2)


def radial_derivative_norm(u: TestFunction, p: float, g: GroupSpec, q: QuasiNormSpec, scheme: QuadratureScheme) -> IntegralResult:
    """(|S| int_0^inf |phi'(r)|^p r^(Q-1) dr)^(1/p) for radial u."""
    if not u.radial:
        raise ConfigError("the radial derivative norm needs a radial test function")
    lo, hi = _support_range(u)
    Q = g.Q

    def fun(r):
        return np.abs(u.dprofile(r)) ** p * r ** (Q - 1)

    val, err, n = _radial_pair(fun, lo, hi * (1 - 1e-15), u.breakpoints, scheme, tail=False)
    S = sphere_measure(q, g)
    return IntegralResult(S * val, S * err, n).root(p)
