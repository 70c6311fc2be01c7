import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from homhardy.errors import ConfigError, NumericError
from homhardy.group_core import qnorm, sphere_measure
from homhardy.profiles import indicator, tent
from homhardy.quadrature import (
    IntegralResult,
    QuadratureScheme,
    RadialCumulative,
    angular_rule,
    ball_integral,
    complement_integral,
    fold_rule,
    gauss_on_edges,
    graded_edges,
    integrate_cartesian,
    integrate_gagliardo,
    integrate_polar,
    log_gauss_on_edges,
    radial_integral,
)

from conftest import ANISO, AMAX, EUC, HEIS, KOR, PAIRS, R1, R2

SCH = QuadratureScheme()
COARSE = QuadratureScheme(order=4, angular=8, per_decade=2.0, rtol=0.05)

# int int |u(x)-u(y)|^2 / |x-y|^2.5 dx dy for the tent on 1 < |x| < 2 (peak 1.5),
# evaluated in 30-digit arithmetic by splitting the plane into the diagonal strip
# (substitution d = t^2), the cross block and the closed-form complement integrals
TENT_R1_GAGLIARDO = 23.4972578707824377


def test_integral_result_is_plain_float():
    r = IntegralResult(np.float64(2.0), np.float64(0.5), np.int64(3))
    assert type(r.value) is float and type(r.error_bound) is float and type(r.evaluations) is int
    with pytest.raises(ValueError):
        IntegralResult(1.0, -1.0, 1)


def test_root_propagates_bound():
    r = IntegralResult(4.0, 0.4, 10).root(2)
    assert r.value == 2.0
    assert r.error_bound == pytest.approx(2.0 - math.sqrt(3.6))


# -- one-dimensional rules -----------------------------------------------------


@given(st.integers(0, 15))
def test_gauss_exact_for_polynomials(k):
    x, w = gauss_on_edges([0.0, 0.3, 1.0], 8)
    assert np.dot(x**k, w) == pytest.approx(1.0 / (k + 1), rel=1e-13)


@given(st.floats(-3.5, 3.5))
def test_log_gauss_exact_for_powers(k):
    r, w = log_gauss_on_edges([1.0, 2.0, 4.0], 8)
    exact = math.log(4.0) if abs(k + 1) < 1e-12 else (4.0 ** (k + 1) - 1.0) / (k + 1)
    assert np.dot(r**k, w) == pytest.approx(exact, rel=1e-12)


def test_graded_edges_contain_breaks():
    e = graded_edges(1e-3, 1e3, (1.0, 1.5, 2.0), 3.0, 2)
    assert np.all(np.diff(e) > 0)
    for b in (1e-3, 1.0, 1.5, 2.0, 1e3):
        assert np.min(np.abs(e - b)) == 0.0


def test_graded_edges_grade_an_end_on_a_breakpoint():
    hi = 2.0 * (1 - 1e-15)
    graded = graded_edges(1e-3, hi, (1.0, 2.0), 3.0, 3)
    plain = graded_edges(1e-3, hi, (1.0,), 3.0, 3)
    assert hi - graded[-2] < 0.1 * (hi - plain[-2])


def test_radial_integral_with_power_ends():
    v, _, _, _ = radial_integral(lambda r: np.exp(-r), 1e-7, 50.0, (), SCH)
    assert v == pytest.approx(1.0, rel=1e-9)


def test_radial_integral_detects_divergence():
    with pytest.raises(NumericError):
        radial_integral(lambda r: 1.0 / r, 1e-3, 1e3, (), SCH)
    with pytest.raises(NumericError):
        radial_integral(lambda r: r**-1.5, 1e-3, 1e3, (), SCH)


# -- angular rules --------------------------------------------------------------


@pytest.mark.parametrize("name,g,q", PAIRS, ids=[p[0] for p in PAIRS])
def test_angular_weights_sum_to_sphere(name, g, q):
    om, w = angular_rule(q, g, 16)
    assert np.sum(w) == pytest.approx(sphere_measure(q, g), rel=1e-6)
    assert np.allclose(qnorm(q, g, om), 1.0, rtol=1e-12)


@pytest.mark.parametrize("name,g,q", PAIRS, ids=[p[0] for p in PAIRS])
@pytest.mark.parametrize("keep_first", [False, True])
def test_fold_preserves_mass(name, g, q, keep_first):
    om, w = angular_rule(q, g, 16)
    nodes, fw = fold_rule(q, g, om, w, keep_first)
    assert np.sum(fw) == pytest.approx(np.sum(w), rel=1e-12)
    assert len(nodes) <= len(om)


# -- Cartesian and polar -----------------------------------------------------------


def test_cartesian_unit_square():
    r = integrate_cartesian(lambda x: np.ones(x.shape[:-1]), [(0, 1), (0, 1)], SCH)
    assert r.value == pytest.approx(1.0, rel=1e-14)


def test_cartesian_gaussian_auto_box():
    r = integrate_cartesian(lambda x: np.exp(-np.sum(x * x, axis=-1)), None, SCH, N=2)
    assert abs(r.value - math.pi) < 1e-4


def test_cartesian_koranyi_ball():
    sch = QuadratureScheme(cartesian_panels=12)
    r = integrate_cartesian(lambda x: (qnorm(KOR, HEIS, x) < 1).astype(float), [(-1, 1)] * 3, sch)
    assert r.value == pytest.approx(math.pi**2 / 2, rel=1e-3)


def test_cartesian_reports_bad_point():
    with pytest.raises(NumericError) as exc, np.errstate(invalid="ignore"):
        integrate_cartesian(lambda x: np.sqrt(x[..., 0]), [(-1, 1)], SCH)
    assert exc.value.point is not None


def test_polar_ball_indicator(pair):
    g, q = pair
    r = integrate_polar(lambda r, w: (r < 1).astype(float), SCH, g, q, breaks=(1.0,), r_range=(1e-6, 1e3))
    assert r.value == pytest.approx(sphere_measure(q, g) / g.Q, rel=1e-9)


def test_polar_exponential_r1():
    r = integrate_polar(lambda r, w: np.exp(-r), SCH, R1, EUC)
    assert r.value == pytest.approx(2.0, rel=1e-9)


def test_polar_power_on_annulus():
    Q, sp = 1.0, 1.5
    r = integrate_polar(lambda r, w: np.where((r > 1) & (r < 2), r**-sp, 0.0), SCH, R1, EUC, breaks=(1.0, 2.0), r_range=(1e-3, 1e3))
    assert r.value == pytest.approx(2.0 * (2.0 ** (Q - sp) - 1.0) / (Q - sp), rel=1e-12)


@pytest.mark.parametrize("name,g,q", PAIRS, ids=[p[0] for p in PAIRS])
def test_polar_matches_cartesian(name, g, q):
    f = lambda x: np.exp(-qnorm(q, g, x) ** 2)  # noqa: E731
    pol = integrate_polar(lambda r, w: np.exp(-r * r), SCH, g, q)
    # the max gauge has a kink along x2 = x1^2 that box panels resolve slowly
    panels = 64 if q.kind == "aniso_max" else 16
    car = integrate_cartesian(f, None, QuadratureScheme(cartesian_panels=panels), N=g.N)
    assert pol.value == pytest.approx(car.value, rel=max(1e-3, (pol.error_bound + car.error_bound) / pol.value))


# -- regions and cumulative tables ----------------------------------------------------


def test_ball_integral_volume(pair):
    g, q = pair
    r = ball_integral(lambda t: np.ones_like(t), 1.0, SCH, g, q, radial=True)
    assert r.value == pytest.approx(sphere_measure(q, g) / g.Q, rel=1e-10)


def test_ball_and_complement_powers_r1():
    R = 1.7
    b = ball_integral(lambda t: t**1.5, R, SCH, R1, EUC, radial=True)
    assert b.value == pytest.approx(2 * R**2.5 / 2.5, rel=1e-10)
    c = complement_integral(lambda t: t**-2.0, R, SCH, R1, EUC, radial=True)
    assert c.value == pytest.approx(2 / R, rel=1e-10)


def test_ball_integral_non_radial_path():
    b = ball_integral(lambda x: np.ones(x.shape[:-1]), 2.0, SCH, R2, EUC)
    assert b.value == pytest.approx(4 * math.pi, rel=1e-9)
    c = complement_integral(lambda x: np.sum(x * x, axis=-1) ** -2, 1.0, SCH, R2, EUC)
    assert c.value == pytest.approx(math.pi, rel=1e-8)


def test_divergent_complement():
    with pytest.raises(NumericError):
        complement_integral(lambda t: t**-1.0, 1.0, SCH, R1, EUC, radial=True)


@settings(max_examples=25)
@given(st.floats(0.01, 100.0))
def test_cumulative_inner_plus_outer(r):
    cum = RadialCumulative(lambda t: np.exp(-t), 2.0, 2 * math.pi)
    total = 2 * math.pi  # 2 pi int_0^inf e^-t t dt
    assert cum.inner(r) + cum.outer(r) == pytest.approx(total, rel=1e-11)
    assert cum.inner(r) == pytest.approx(2 * math.pi * (1 - math.exp(-r) * (1 + r)), rel=1e-9, abs=1e-14)


def test_cumulative_divergent_sides():
    cum = RadialCumulative(lambda t: t**-0.5, 1.0, 2.0)
    assert math.isinf(cum.tail)
    assert cum.inner(3.0) == pytest.approx(4 * math.sqrt(3.0), rel=1e-12)


# -- the Gagliardo double integral ----------------------------------------------------------


def test_gagliardo_r1_tent_against_oracle():
    r = integrate_gagliardo(tent(1.0, 1.5, 2.0), 2.0, 0.75, None, SCH, R1, EUC)
    assert r.value == pytest.approx(TENT_R1_GAGLIARDO, rel=1e-5)
    assert abs(r.value - TENT_R1_GAGLIARDO) <= r.error_bound


def test_gagliardo_zero_function():
    r = integrate_gagliardo(tent(1.0, 1.5, 2.0).scaled(0.0), 2.0, 0.75, None, SCH, R1, EUC)
    assert r.value == 0.0 and r.error_bound == 0.0


def test_gagliardo_refuses_divergent_cases():
    with pytest.raises(ConfigError, match="divergent seminorm"):
        integrate_gagliardo(tent(1.0, 1.5, 2.0), 2.0, 1.0, None, SCH, R1, EUC)
    with pytest.raises(ConfigError, match="divergent seminorm"):
        integrate_gagliardo(indicator(1.0, 2.0), 2.0, 0.5, None, SCH, R1, EUC)
    with pytest.raises(ConfigError):
        integrate_gagliardo(tent(1.0, 1.5, 2.0), 1.0, 0.5, None, SCH, R1, EUC)


def test_gagliardo_budget_exhaustion_keeps_partial():
    sch = QuadratureScheme(budget=1, rtol=1e-12)
    with pytest.raises(NumericError) as exc:
        integrate_gagliardo(tent(1.0, 1.5, 2.0), 2.0, 0.75, None, sch, R1, EUC)
    part = exc.value.partial
    assert isinstance(part, IntegralResult) and part.value == pytest.approx(TENT_R1_GAGLIARDO, rel=1e-3)


def test_gagliardo_deterministic():
    u = tent(1.0, 1.5, 2.0)
    assert integrate_gagliardo(u, 2.0, 0.75, None, SCH, R1, EUC) == integrate_gagliardo(u, 2.0, 0.75, None, SCH, R1, EUC)


@pytest.mark.parametrize(
    "g,q,p,s",
    [(R1, EUC, 2.0, 0.75), (R2, EUC, 3.0, 0.8), (ANISO, AMAX, 4.0, 0.95), (HEIS, KOR, 5.0, 0.9)],
    ids=["R1", "R2", "aniso", "heisenberg"],
)
@pytest.mark.parametrize("lam", [2.0, 0.5])
def test_gagliardo_dilation_covariance(g, q, p, s, lam):
    u = tent(1.0, 1.5, 2.0)
    base = integrate_gagliardo(u, p, s, None, COARSE, g, q).value
    scaled = integrate_gagliardo(u.dilated(lam), p, s, None, COARSE, g, q).value
    assert scaled == pytest.approx(lam ** (s * p - g.Q) * base, rel=1e-3)


def test_gagliardo_weight_scales_linearly():
    u = tent(1.0, 1.5, 2.0)
    base = integrate_gagliardo(u, 2.0, 0.75, None, SCH, R1, EUC).value
    w = integrate_gagliardo(u, 2.0, 0.75, lambda nx, ny, nd: np.full_like(nx, 3.0), SCH, R1, EUC).value
    assert w == pytest.approx(3.0 * base, rel=1e-12)
