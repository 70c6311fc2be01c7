import math

import pytest

from homhardy import verifier
from homhardy.errors import ConfigError
from homhardy.profiles import indicator, steps, tent
from homhardy.verifier import (
    Check,
    Scenario,
    check_admissibility,
    extremal_search,
    near_extremal,
    theorem_constants,
    verify,
)
from homhardy.weights import WeightSpec

from conftest import EUC, R1, R2

TENT = tent(1.0, 1.5, 2.0)


def scen(theorem, g=R1, qn=EUC, p=2.0, corpus=(TENT,), **kw):
    weights = kw.pop("weights", {})
    return Scenario(theorem, g, qn, p, corpus=corpus, weights=WeightSpec.from_dict(weights), **kw)


def only(rep):
    assert len(rep.records) == 1
    return rep.records[0]


# -- verdict plumbing ------------------------------------------------------------------


def test_check_margin_and_verdicts():
    c = Check("x", lhs=10.0, rhs=4.0, constant=2.0, lhs_error=1.0, rhs_error=0.5)
    assert c.margin == 2.0
    assert c.verdict == "pass"  # 10 <= 8 + 2
    c = Check("x", lhs=10.5, rhs=4.0, constant=2.0, lhs_error=0.1, rhs_error=0.1)
    assert c.verdict == "violation"
    c.converged = False
    assert c.verdict == "inconclusive"


def test_check_ratio_edge_cases():
    assert Check("x", 0.0, 0.0, 1.0, 0.0, 0.0).ratio == 0.0
    assert math.isinf(Check("x", 1.0, 0.0, 1.0, 0.0, 0.0).ratio)
    add = Check("x", 1.0, 3.0, 1.0, 0.0, 0.0, additive=True)
    assert add.ratio == pytest.approx(math.exp(-2.0)) and add.verdict == "pass"


def test_infinite_constant_does_not_poison_margin():
    c = Check("x", 1.0, 1.0, math.inf, 0.1, 0.1)
    assert c.margin == pytest.approx(0.1)


# -- scenario validation ------------------------------------------------------------------


def test_scenario_rejects_unknown_theorem():
    with pytest.raises(ConfigError):
        scen("hardy_rellich")


def test_scenario_requires_exponents():
    with pytest.raises(ConfigError, match="needs the exponent q"):
        scen("nash", s=0.75)
    with pytest.raises(ConfigError, match="needs the exponent s"):
        scen("frac_hardy")


def test_radial_hardy_rejects_non_radial_corpus():
    with pytest.raises(ConfigError, match="radial"):
        scen("radial_hardy", g=R2, p=1.5, corpus=(tent(1, 1.5, 2, angular_mod=0.2),))


def test_p_le_one_rejected_before_anything():
    with pytest.raises(ConfigError, match="p>1 required"):
        theorem_constants(scen("frac_hardy", p=1.0, s=0.75))


# -- gates -----------------------------------------------------------------------------------


def test_frac_hardy_gate_r1():
    gates, bundle = theorem_constants(scen("frac_hardy", s=0.75))
    main = [g for g in gates if g.name.startswith("D1")][0]
    assert main.value == pytest.approx(0.8, rel=1e-14) and main.passed
    assert bundle.d1 == pytest.approx(0.4, rel=1e-14)
    assert bundle.front_constant == pytest.approx(2**0.75 / 0.2, rel=1e-12)


def test_radial_hardy_boundary_not_applicable():
    rep = verify(scen("radial_hardy", g=R2, p=2.0))
    assert not rep.applicable
    assert rep.overall == "not_applicable"
    assert only(rep).verdict == "not_applicable"


def test_nash_gate_r1():
    gates = check_admissibility(scen("nash", q=3.0, s=0.75))
    nash = [g for g in gates if g.name.startswith("2^")][0]
    assert nash.value == pytest.approx(2 ** (5 / 6) * 2 ** (2 / 3) / 4.25, rel=1e-6)
    assert nash.value == pytest.approx(0.6655, abs=1e-4) and nash.passed
    hs = [g for g in gates if g.name == "D1(q')^(1/q')q^(1/q)<1"][0]
    assert hs.value == pytest.approx(0.7059, abs=1e-4)


def test_log_hs_reports_both_gates():
    gates = check_admissibility(scen("log_hs", q=3.0, s=0.75))
    names = {g.name for g in gates}
    assert "D1(p')^(1/p')p^(1/q)<1" in names and "D1(q')^(1/q')q^(1/q)<1" in names


def test_failing_gate_skips_every_integral(monkeypatch):
    def boom(*a, **k):
        raise AssertionError("integral evaluated although a gate fails")

    for name in ("gagliardo", "radial_lp", "nested_hs_rhs", "entropy_term"):
        monkeypatch.setattr(verifier, name, boom)
    # s = 0.4, p = 2 on R^1: D1 = 1/1.8 and the gate is 1.11
    rep = verify(scen("frac_hardy", s=0.4))
    assert not rep.applicable and rep.evaluations == 0
    assert math.isinf(rep.constants.front_constant)
    assert rep.constants.gate_value >= 1


@pytest.mark.parametrize("s", [0.3, 0.45, 0.5, 0.55, 0.8, 0.95])
def test_front_constant_infinite_iff_gate_fails(s):
    _, b = theorem_constants(scen("frac_hardy", s=s))
    assert math.isinf(b.front_constant) == (b.gate_value >= 1)


# -- the theorems on small cases --------------------------------------------------------------


def test_integral_hardy_classical():
    u = indicator(0.0, 1.0)
    rep = verify(scen("integral_hardy", q=2.0, corpus=(u, u.scaled(2.0)), weights={"alpha": 0.0, "beta": -2.0}))
    assert rep.constants.d1 == pytest.approx(2.0, rel=1e-6)
    assert (rep.constants.bracket_low, rep.constants.bracket_high) == pytest.approx((2.0, 4.0), rel=1e-6)
    a, b = rep.records
    assert a.main.lhs == pytest.approx(4.0, rel=1e-6)
    assert a.main.rhs == pytest.approx(math.sqrt(2.0), rel=1e-9)
    assert a.ratio == pytest.approx(2 * math.sqrt(2), rel=1e-3)
    assert b.ratio == pytest.approx(a.ratio, rel=1e-9)
    assert rep.overall == "pass"


@pytest.mark.parametrize(
    "theorem,kw",
    [
        ("frac_hardy", {"s": 0.75}),
        ("uncertainty", {"s": 0.75}),
        ("hardy_sobolev", {"q": 3.0, "s": 0.75}),
        ("log_hs", {"q": 3.0, "s": 0.75}),
        ("nash", {"q": 3.0, "s": 0.75}),
        ("integral_hardy", {"q": 2.0, "weights": {"alpha": 0.0, "beta": -2.0}}),
        ("log_holder", {"q": 3.0}),
    ],
)
def test_zero_function_passes(theorem, kw):
    rep = verify(scen(theorem, corpus=(TENT.scaled(0.0),), **kw))
    rec = only(rep)
    if theorem in ("log_holder", "log_hs"):
        # the entropy of u = 0 is undefined and is reported as such
        assert rec.verdict == "error"
    else:
        assert rec.verdict == "pass" and rec.main.lhs == 0.0 and rec.main.rhs == 0.0


def test_frac_hardy_tent_r1():
    rec = only(verify(scen("frac_hardy", s=0.75)))
    assert rec.verdict == "pass"
    assert rec.ratio < rec.main.constant


def test_indicator_in_gagliardo_is_an_error_record():
    rec = only(verify(scen("frac_hardy", s=0.75, corpus=(indicator(1.0, 2.0),))))
    assert rec.verdict == "error" and "divergent seminorm" in rec.message


def test_uncertainty_holder_step():
    rec = only(verify(scen("uncertainty", s=0.75)))
    assert rec.verdict == "pass"
    holder = rec.checks[1]
    assert holder.name == "holder_step" and holder.ratio <= 1.0


def test_hardy_sobolev_tent_r1():
    rec = only(verify(scen("hardy_sobolev", q=3.0, s=0.75)))
    assert rec.verdict == "pass"


def test_hs_with_equal_exponents_collapses_to_frac_hardy():
    fr = verify(scen("frac_hardy", s=0.9, weights={"a": "|y|^0.5"}))
    hs = verify(scen("hardy_sobolev", q=2.0, s=0.9, weights={"z": "|x|^0.5"}))
    assert hs.constants.d1 == pytest.approx(fr.constants.d1, rel=1e-10)
    assert hs.constants.front_constant == pytest.approx(fr.constants.front_constant, rel=1e-10)
    a, b = only(fr).main, only(hs).main
    assert b.lhs == pytest.approx(a.lhs, rel=1e-12)
    assert b.rhs == pytest.approx(a.rhs, abs=a.rhs_error + b.rhs_error + 1e-9)


def test_log_holder_indicator_equality():
    rec = only(verify(scen("log_holder", q=3.0, corpus=(indicator(0.5, 2.0),))))
    m = rec.main
    assert abs(m.lhs - m.rhs) <= m.margin + 1e-12
    assert m.lhs == pytest.approx(math.log(1 / 3.0), abs=1e-9)


def test_log_holder_two_level_gap():
    p, q = 2.0, 3.0
    u = steps([0.5, 1.0, 2.0], [1.0, 0.5])
    m1, m2 = 1.0, 2.0  # measures of the two level sets on R^1
    Z = m1 + 0.5**p * m2
    lhs = m1 / Z * math.log(1 / Z) + m2 * 0.5**p / Z * math.log(0.5**p / Z)
    rhs = q / (q - p) * math.log((m1 + 0.5**q * m2) ** (p / q) / Z)
    m = only(verify(scen("log_holder", q=q, corpus=(u,)))).main
    assert rhs - lhs > 1e-3
    assert m.rhs - m.lhs == pytest.approx(rhs - lhs, abs=1e-6)


def test_log_hs_tent_r1():
    rec = only(verify(scen("log_hs", q=3.0, s=0.75)))
    assert rec.verdict == "pass"
    assert [c.name for c in rec.checks] == ["log_hs", "log_holder_step"]


def test_nash_tent_r1_with_jensen_step():
    rec = only(verify(scen("nash", q=3.0, s=0.75)))
    assert rec.verdict == "pass"
    jensen = rec.checks[1]
    assert jensen.name == "jensen_step" and jensen.verdict == "pass"
    assert jensen.lhs <= jensen.rhs


def test_nash_scaling_invariance():
    rep = verify(scen("nash", q=3.0, s=0.75, corpus=(TENT, TENT.scaled(3.0))))
    a, b = rep.records
    assert b.ratio == pytest.approx(a.ratio, rel=1e-9)


def test_radial_hardy_tent_r2():
    rep = verify(scen("radial_hardy", g=R2, p=1.5))
    rec = only(rep)
    assert rec.verdict == "pass" and rec.ratio < 3.0
    fam = rep.extras["sharpness"]["family"]
    ratios = [r["ratio"] for r in fam]
    assert ratios == sorted(ratios)  # approaches p/(Q-p) as eps decreases


@pytest.mark.parametrize("lam", [1e-3, 10.0])
def test_frac_hardy_lambda_invariance(lam):
    base = verify(scen("frac_hardy", s=0.9, weights={"a": "|y|^0.5"}))
    scaled = verify(scen("frac_hardy", s=0.9, weights={"a": f"{lam!r}*|y|^0.5"}))
    assert scaled.constants.d1 == pytest.approx(base.constants.d1, rel=1e-10)
    a, b = only(base).main, only(scaled).main
    assert b.lhs == pytest.approx(lam**0.5 * a.lhs, rel=1e-10)
    assert b.ratio == pytest.approx(a.ratio, rel=1e-6)


@pytest.mark.parametrize("lam", [0.5, 2.0])
def test_frac_hardy_dilation_invariance(lam):
    rep = verify(scen("frac_hardy", s=0.75, corpus=(TENT, TENT.dilated(lam))))
    a, b = rep.records
    assert b.verdict == a.verdict == "pass"
    assert b.ratio == pytest.approx(a.ratio, rel=1e-3)


# -- sharpness and extremal search ----------------------------------------------------------


def test_near_extremal_profile_shape():
    u = near_extremal(2.0, 1.5, 0.1)
    assert u.params["gamma"] == pytest.approx(-1 / 3 + 0.1)
    assert u.support == (0.0, 1e4)


FAMILY = {"kind": "tent", "free": {"r0": [0.2, 0.9], "peak": [1.0, 1.8]}, "fixed": {"R": 2.0}}


def test_extremal_search_deterministic_and_bounded():
    sc = scen("frac_hardy", s=0.75, seed=7)
    a = extremal_search(sc, FAMILY, iterations=12, restarts=2)
    b = extremal_search(sc, FAMILY, iterations=12, restarts=2)
    assert a.to_dict() == b.to_dict()
    assert 0 < a.best_ratio <= theorem_constants(sc)[1].front_constant
    for k, (lo, hi) in FAMILY["free"].items():
        assert lo <= a.params[k] <= hi


def test_extremal_search_skips_invalid_parameters():
    # peak below r0 is not a valid tent; those points are skipped rather than raising
    fam = {"kind": "tent", "free": {"r0": [0.5, 1.4], "peak": [0.6, 1.5]}, "fixed": {"R": 2.0}}
    res = extremal_search(scen("frac_hardy", s=0.75), fam, iterations=10, restarts=2)
    assert any(t["ratio"] is None for t in res.trace) or res.best_ratio > 0


def test_extremal_search_radial_hardy_below_sharp_constant():
    sc = scen("radial_hardy", g=R2, p=1.5)
    fam = {"kind": "truncated_power", "free": {"gamma": [-0.3, 0.5]}, "fixed": {"r0": 1.0, "R": 1e4}}
    res = extremal_search(sc, fam, iterations=20, restarts=1)
    assert 2.0 < res.best_ratio <= 3.0 * (1 + 1e-6)


@pytest.mark.parametrize(
    "family,match",
    [
        ({"kind": "tent", "free": {}}, "between 1 and 6"),
        ({"kind": "tent", "free": {"r0": [1.0, 0.5]}, "fixed": {"peak": 1.5, "R": 2.0}}, "lo < hi"),
        ({"kind": "tent", "free": {"r0": [0.1, 0.5]}, "color": 1}, "unknown family keys"),
    ],
)
def test_extremal_search_rejects_bad_families(family, match):
    with pytest.raises(ConfigError, match=match):
        extremal_search(scen("frac_hardy", s=0.75), family, iterations=4, restarts=1)


def test_extremal_search_needs_passing_gates():
    with pytest.raises(ConfigError, match="gates"):
        extremal_search(scen("frac_hardy", s=0.4), FAMILY, iterations=4, restarts=1)


def test_report_dict_has_stable_shape():
    rep = verify(scen("frac_hardy", s=0.75))
    d = rep.to_dict()
    assert list(d) == ["theorem", "applicable", "overall", "gates", "constants", "results", "extras", "meta"]
    assert d["meta"]["wall_time"] is None
    r = d["results"][0]
    assert {"function_id", "lhs", "rhs", "ratio", "margin", "verdict"} <= set(r)
