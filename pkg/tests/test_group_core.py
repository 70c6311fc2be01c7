import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from homhardy.errors import ConfigError, InputError
from homhardy.group_core import (
    GroupSpec,
    QuasiNormSpec,
    abelian,
    angular_projection,
    certified_ctri,
    dilate,
    estimate_ctri,
    group_inv,
    group_mul,
    qnorm,
    sphere_measure,
    unit_ball_volume,
)

from conftest import AMAX, ANISO, ASMOOTH, EUC, HEIS, KOR, PAIRS, R1, R2, R3

# squares of coordinates below ~1e-150 underflow; stay clear of that range
coord = st.floats(-5, 5, allow_nan=False).filter(lambda v: v == 0 or abs(v) > 1e-30)
lam = st.floats(0.05, 20)


def point(n):
    return st.lists(coord, min_size=n, max_size=n)


# -- group law ---------------------------------------------------------------


def test_abelian_product():
    assert np.array_equal(group_mul(R2, [1, 2], [3, 4]), [4, 6])


def test_heisenberg_product():
    assert np.allclose(group_mul(HEIS, [1, 0, 0], [0, 1, 0]), [1, 1, 0.5])


def test_heisenberg_is_not_commutative():
    x, y = [1, 0, 0], [0, 1, 0]
    assert not np.allclose(group_mul(HEIS, x, y), group_mul(HEIS, y, x))


def test_dimension_mismatch():
    with pytest.raises(InputError):
        group_mul(R2, [1, 2, 3], [1, 2])


def test_group_spec_validation():
    assert R3.Q == 3.0 and ANISO.Q == 3.0 and HEIS.Q == 4.0
    with pytest.raises(ConfigError):
        GroupSpec(3, (1, 1, 1), "heisenberg")
    with pytest.raises(ConfigError):
        abelian([1, -1])
    with pytest.raises(ConfigError):
        QuasiNormSpec("taxicab")


@given(point(3))
def test_inverse_gives_identity(x):
    assert np.allclose(group_mul(HEIS, x, group_inv(HEIS, x)), 0.0, atol=1e-12)


@given(point(3), point(3), point(3))
def test_heisenberg_associative(x, y, z):
    a = group_mul(HEIS, group_mul(HEIS, x, y), z)
    b = group_mul(HEIS, x, group_mul(HEIS, y, z))
    assert np.allclose(a, b, atol=1e-9)


# -- dilations ---------------------------------------------------------------


def test_dilation_examples():
    assert np.allclose(dilate(HEIS, 2.0, [1, 1, 1]), [2, 2, 4])
    assert np.allclose(dilate(ANISO, 3.0, [1, 1]), [3, 9])
    assert np.array_equal(dilate(R2, 1.0, [0.3, -0.7]), [0.3, -0.7])


def test_dilation_rejects_nonpositive():
    with pytest.raises(InputError):
        dilate(R1, 0.0, [1.0])


@given(lam, point(3), point(3))
def test_dilation_is_automorphism(l, x, y):
    lhs = dilate(HEIS, l, group_mul(HEIS, x, y))
    rhs = group_mul(HEIS, dilate(HEIS, l, x), dilate(HEIS, l, y))
    assert np.allclose(lhs, rhs, rtol=1e-12, atol=1e-12 * (1 + l * l) * 50)


# -- quasi-norms -------------------------------------------------------------


def test_qnorm_examples():
    assert qnorm(KOR, HEIS, [0, 0, 1]) == pytest.approx(1.0)
    assert qnorm(AMAX, ANISO, [0.5, 0.25]) == pytest.approx(0.5)
    assert qnorm(KOR, HEIS, dilate(HEIS, 3.0, [1, 0, 0])) == pytest.approx(3.0)


def test_incompatible_qnorm():
    with pytest.raises(ConfigError):
        qnorm(KOR, R3, [1, 0, 0])
    with pytest.raises(ConfigError):
        qnorm(EUC, ANISO, [1, 0])


@pytest.mark.parametrize("name,g,q", PAIRS, ids=[p[0] for p in PAIRS])
@settings(max_examples=30)
@given(l=lam, x=point(3))
def test_homogeneity_and_symmetry(name, g, q, l, x):
    x = np.array(x[: g.N])
    n = float(qnorm(q, g, x))
    assert float(qnorm(q, g, dilate(g, l, x))) == pytest.approx(l * n, rel=1e-12, abs=1e-300)
    assert float(qnorm(q, g, group_inv(g, x))) == n


@pytest.mark.parametrize("name,g,q", PAIRS, ids=[p[0] for p in PAIRS])
def test_norm_vanishes_only_at_identity(name, g, q):
    assert float(qnorm(q, g, np.zeros(g.N))) == 0.0
    rng = np.random.default_rng(3)
    assert np.all(qnorm(q, g, rng.standard_normal((200, g.N))) > 0)


@pytest.mark.parametrize("name,g,q", PAIRS, ids=[p[0] for p in PAIRS])
def test_angular_projection_lands_on_sphere(name, g, q):
    x = np.random.default_rng(1).standard_normal((50, g.N))
    r, om = angular_projection(q, g, x)
    assert np.allclose(qnorm(q, g, om), 1.0, rtol=1e-12)
    assert np.allclose(dilate(g, r, om), x, rtol=1e-10, atol=1e-12)


# -- quasi-triangle constants ------------------------------------------------


def test_certified_values():
    assert certified_ctri(EUC, R2) == 1.0
    assert certified_ctri(KOR, HEIS) == 1.0
    assert certified_ctri(AMAX, ANISO) == 1.0
    assert certified_ctri(AMAX, abelian([0.5, 1])) == 2.0


@pytest.mark.parametrize("name,g,q", PAIRS, ids=[p[0] for p in PAIRS])
def test_sampled_constant_below_certified(name, g, q):
    est = estimate_ctri(q, g, samples=200_000, seed=5)
    assert 0 < est <= certified_ctri(q, g) * (1 + 1e-12)


def test_estimate_deterministic_and_euclidean_bound():
    a = estimate_ctri(EUC, R2, 20_000, seed=9)
    assert a == estimate_ctri(EUC, R2, 20_000, seed=9)
    assert 0 < a <= 1.0


def test_koranyi_sampled_at_most_one():
    assert estimate_ctri(KOR, HEIS, samples=1_000_000, seed=0) <= 1 + 1e-12


def test_equal_points_attain_one():
    x = np.array([0.3, -0.4])
    assert float(qnorm(EUC, R2, group_mul(R2, x, x)) / (2 * qnorm(EUC, R2, x))) == pytest.approx(1.0, abs=1e-15)


# -- sphere measure ----------------------------------------------------------


@pytest.mark.parametrize(
    "g,q,expected",
    [
        (R1, EUC, 2.0),
        (R2, EUC, 2 * math.pi),
        (R3, EUC, 4 * math.pi),
        (HEIS, KOR, 2 * math.pi**2),
        # unit ball {|x1| < 1, |x2| < 1} has area 4, Q = 3
        (ANISO, AMAX, 12.0),
    ],
)
def test_sphere_measure(g, q, expected):
    assert sphere_measure(q, g) == pytest.approx(expected, rel=1e-9)


def test_smooth_ball_smaller_than_max_ball():
    # the smooth gauge dominates the max gauge, so its unit ball is smaller
    assert sphere_measure(ASMOOTH, ANISO) < sphere_measure(AMAX, ANISO)


def test_ball_volume_converges():
    assert unit_ball_volume(KOR, HEIS, 48) == pytest.approx(math.pi**2 / 2, rel=1e-6)
