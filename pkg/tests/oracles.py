"""Brute-force reference values on the real line.

These use dense midpoint grids and closed-form tails only; none of the
package's quadrature is involved, so they serve as an independent route.
The test function is even with support in 1 <= |x| <= R.
"""

import numpy as np


def _midpoints(a, b, n):
    h = (b - a) / n
    return a + h * (np.arange(n) + 0.5), h


def weighted_lp_r1(phi, p, sp, R, n=400_000):
    """int_R |phi(|x|)|^p |x|^(-sp) dx."""
    x, h = _midpoints(0.0, R, n)
    return 2.0 * h * float(np.sum(np.abs(phi(x)) ** p * x ** (-sp)))


def _inner(phi, p, sp, R, y, nt):
    """int_R |u(x) - u(y)|^p |x - y|^(-1-sp) dx for each y >= 0 (u even)."""
    k = 1.0 / (p - sp)  # x = y +- t^k makes the diagonal integrand bounded
    uy = phi(y)
    out = np.zeros_like(y)
    # the part of x outside [-R, R], where u(x) = 0
    far = np.where(
        y < R,
        ((R - y) ** (-sp) + (R + y) ** (-sp)) / sp,
        0.0,
    )
    out += np.abs(uy) ** p * far
    inside = y < R
    for sign in (1.0, -1.0):
        # x runs from y toward the end of [-R, R] in direction `sign`
        span = np.where(sign > 0, R - y, R + y)
        span = np.where(inside, span, 0.0)
        T = span ** (1.0 / k)
        t01, _ = _midpoints(0.0, 1.0, nt)
        t = T[:, None] * t01[None, :]
        hstep = t**k
        x = y[:, None] + sign * hstep
        diff = np.abs(phi(np.abs(x)) - uy[:, None]) ** p
        dens = diff * k * t ** (k - 1.0) * hstep ** (-1.0 - sp)
        out += np.where(inside, T / nt * dens.sum(axis=1), 0.0)
    # y outside the support: plain grid over x in [-R, R], no singularity
    outside = ~inside
    if np.any(outside):
        x, hx = _midpoints(-R, R, 4 * nt)
        yo = y[outside]
        val = (np.abs(phi(np.abs(x))) ** p)[None, :] * np.abs(x[None, :] - yo[:, None]) ** (-1.0 - sp)
        out[outside] = hx * val.sum(axis=1)
    return out


def _inner_chunked(phi, p, sp, R, y, nt, chunk=256):
    # zero-width spans at y = R produce 0 * inf terms that the where() discards
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.concatenate([_inner(phi, p, sp, R, y[i : i + chunk], nt) for i in range(0, len(y), chunk)])


def gagliardo_r1(phi, p, s, R, outer=1.0, ny=4000, nt=2000, far=1e5):
    """int_R (int_R |u(x)-u(y)|^p |x-y|^(-1-sp) dx)^outer dy by dense grids.

    outer = q/p gives the nested form; outer = 1 the plain seminorm^p.
    The y > R range is graded in log(y - R) up to `far`, beyond which the
    inner integral is replaced by its asymptote ||u||_p^p y^(-1-sp).
    """
    sp = s * p
    y_in, h_in = _midpoints(0.0, R, ny)
    total = h_in * float(np.sum(_inner_chunked(phi, p, sp, R, y_in, nt) ** outer))
    lt, hl = _midpoints(np.log(1e-9), np.log(far), ny)
    y_out = R + np.exp(lt)
    vals = _inner_chunked(phi, p, sp, R, y_out, nt) ** outer
    total += hl * float(np.sum(vals * np.exp(lt)))
    mass = weighted_lp_r1(phi, p, 0.0, R)
    e = (1.0 + sp) * outer
    total += mass**outer * (R + far) ** (1.0 - e) / (e - 1.0)
    return 2.0 * total


def tent_profile(r0, peak, R):
    def phi(r):
        r = np.asarray(r, dtype=float)
        up = (r - r0) / (peak - r0)
        down = (R - r) / (R - peak)
        return np.clip(np.minimum(up, down), 0.0, None)

    return phi


def radial_grid(f, Q, sphere, lo, hi, n=400_000):
    """|S| int_lo^hi f(r) r^(Q-1) dr by the midpoint rule (for radial integrands)."""
    r, h = _midpoints(lo, hi, n)
    return sphere * h * float(np.sum(f(r) * r ** (Q - 1)))
