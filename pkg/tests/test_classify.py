import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from moscolab.classify import (CONSERVATIVE, CONVERGENT, DIVERGENT, EXPLOSIVE, INCONCLUSIVE, INDETERMINATE,
                               RECURRENT, TRANSIENT, Domain, PathClassification, at_infinity, at_zero,
                               classical_stable_recurrent, classify_chung_fuchs, classify_recurrence_u04,
                               classify_sharp_epsilon, classify_tail, feller_explosion_test, u04_quantities)
from moscolab.coeffs import (DiffusionCoefficient, OrderFunction, constant_diffusion, make_prop15_coefficient,
                             make_sharp_log_order)
from moscolab.families import build_member
from moscolab.levy import LevyExponent

# --- tail classifier --------------------------------------------------------


@pytest.mark.parametrize("p,want", [(-3.0, CONVERGENT), (-2.0, CONVERGENT), (-1.5, CONVERGENT),
                                    (-0.5, DIVERGENT), (0.0, DIVERGENT), (1.0, DIVERGENT)])
def test_powers_at_infinity_resolve_at_depth_zero(p, want):
    v = classify_tail(lambda u: u**p, at_infinity(1.0))
    assert v.verdict == want and v.depth == 0
    assert v.fitted_exponents[0] == pytest.approx(p, abs=1e-9)


@pytest.mark.parametrize("p,want", [(-0.5, CONVERGENT), (-0.9, CONVERGENT), (-1.0, DIVERGENT), (-2.0, DIVERGENT)])
def test_powers_at_zero(p, want):
    v = classify_tail(lambda x: x**p, at_zero(1.0))
    assert v.verdict == want


def test_log_borderline_pair():
    diverging = classify_tail(lambda u: 1.0 / (u * math.log(u)), at_infinity(math.e**2))
    converging = classify_tail(lambda u: 1.0 / (u * math.log(u) ** 2), at_infinity(math.e**2))
    assert diverging.verdict == DIVERGENT and diverging.depth >= 1
    assert converging.verdict == CONVERGENT
    # the exact integral of 1/(u log^2 u) from e^2 is 1/2; partials approach it from below
    last = converging.last_partial
    assert 0.4 < last < 0.5


def test_exact_reciprocal_is_divergent_after_substitution():
    v = classify_tail(lambda u: 1.0 / u, at_infinity(1.0))
    assert v.verdict == DIVERGENT and v.depth == 1


def test_partials_are_increasing_for_positive_integrands():
    v = classify_tail(lambda u: u**-2.0, at_infinity(1.0))
    values = [p for _, p in v.partials]
    assert all(b >= a for a, b in zip(values, values[1:]))
    assert values[-1] == pytest.approx(1.0, rel=1e-6)


@given(st.one_of(st.floats(-3.0, -1.2), st.floats(-0.8, 0.0)))
@settings(max_examples=40, deadline=None)
def test_clear_powers_never_need_recursion(p):
    v = classify_tail(lambda u: u**p, at_infinity(1.0))
    assert v.depth == 0
    assert v.verdict == (CONVERGENT if p < -1 else DIVERGENT)


@given(st.floats(-3.0, 0.0), st.floats(1e-6, 1e6))
@settings(max_examples=40, deadline=None)
def test_constant_factors_do_not_change_verdicts(p, c):
    a = classify_tail(lambda u: u**p, at_infinity(1.0))
    b = classify_tail(lambda u: c * u**p, at_infinity(1.0))
    assert a.verdict == b.verdict


def test_log_integrand_form_agrees_with_direct_form():
    direct = classify_tail(lambda u: 1.0 / (u * math.log(u)), at_infinity(math.e**2))
    logged = classify_tail(None, at_infinity(math.e**2), log_g=lambda t: -t - math.log(t), log_horizon=300.0)
    assert direct.verdict == logged.verdict


def test_tail_errors():
    with pytest.raises(ValueError):
        classify_tail(lambda u: u, at_infinity(), max_depth=0)
    with pytest.raises(ValueError):
        classify_tail(None, at_infinity())
    with pytest.raises(ValueError, match="checkpoints"):
        classify_tail(lambda u: u, at_infinity(), r_max=16.0)
    with pytest.raises(ValueError, match="finite and positive"):
        classify_tail(lambda u: -1.0, at_infinity())
    with pytest.raises(ValueError):
        Domain("middle", 1.0)
    with pytest.raises(ValueError):
        at_zero(0.0)


@pytest.mark.parametrize("max_depth", [1, 2, 3])
def test_depth_is_bounded_and_inconclusive_uses_the_full_budget(max_depth):
    # the log-log slope of this integrand keeps swinging between -3 and +1
    g = lambda u: u ** (-1.0 + 2.0 * math.sin(3.0 * math.log(u)))
    v = classify_tail(g, at_infinity(1.0), max_depth=max_depth)
    assert v.depth <= max_depth
    if v.verdict == INCONCLUSIVE:
        assert v.depth == max_depth


# --- recurrence -------------------------------------------------------------


def test_path_classification_checks_method():
    with pytest.raises(ValueError):
        PathClassification(RECURRENT, "FellerTest")
    with pytest.raises(ValueError):
        PathClassification(EXPLOSIVE, "ChungFuchs")
    c = PathClassification(INDETERMINATE, "U04Criterion")
    assert c.depth is None and c.last_partial is None
    assert c.csv_row("s", "n=1") == ["s", "n=1", "U04Criterion", INDETERMINATE, "", ""]


def test_csv_row_carries_depth_and_partial():
    c = classify_chung_fuchs(LevyExponent(1, OrderFunction.constant(0.5)))
    row = c.csv_row("const-alpha-sweep", 0.5)
    assert row[:4] == ["const-alpha-sweep", 0.5, "ChungFuchs", TRANSIENT]
    assert row[4] == 0
    assert math.isfinite(float(row[5]))


@pytest.mark.parametrize("alpha,want", [(0.5, TRANSIENT), (0.9, TRANSIENT), (1.0, RECURRENT), (1.5, RECURRENT),
                                        (1.9, RECURRENT)])
def test_chung_fuchs_on_stable_exponents(alpha, want):
    assert classify_chung_fuchs(LevyExponent(1, OrderFunction.constant(alpha))).property == want
    assert classical_stable_recurrent(alpha, 1) == (want == RECURRENT)


def test_chung_fuchs_in_two_and_three_dimensions():
    assert classify_chung_fuchs(LevyExponent(2, gaussian=1.0)).property == RECURRENT
    assert classify_chung_fuchs(LevyExponent(2, OrderFunction.constant(1.5))).property == TRANSIENT
    assert classify_chung_fuchs(LevyExponent(3, gaussian=1.0)).property == TRANSIENT
    assert classical_stable_recurrent(2.0, 2) and not classical_stable_recurrent(1.9, 2)


@pytest.mark.parametrize("eps,want", [(0.25, TRANSIENT), (0.5, TRANSIENT), (1.5, RECURRENT), (2.0, RECURRENT)])
def test_chung_fuchs_on_sharp_log_orders_away_from_the_threshold(eps, want):
    e = LevyExponent(1, make_sharp_log_order(eps, 1.0))
    assert classify_chung_fuchs(e).property == want


def test_sharp_epsilon_rule():
    assert classify_sharp_epsilon(1.0, corroborate=False).property == RECURRENT
    assert classify_sharp_epsilon(0.999, corroborate=False).property == TRANSIENT
    with pytest.raises(ValueError):
        classify_sharp_epsilon(0.0)
    c = classify_sharp_epsilon(1.5)
    assert c.property == RECURRENT and "chung-fuchs: Recurrent" in c.note


def test_u04_quantities_for_constant_order():
    # both quantities equal R^(1-alpha) / (2-alpha) and R^(1-alpha) / alpha in d = 1
    alpha = 0.5
    q = u04_quantities(OrderFunction.constant(alpha), r_max=2.0**10)
    r = np.array(q.radii)
    assert np.allclose(q.growth, r ** (1 - alpha) / (2 - alpha), rtol=1e-9)
    assert np.allclose(q.tail, r ** (1 - alpha) / alpha, rtol=1e-9)


@pytest.mark.parametrize("order,want", [
    (OrderFunction.constant(0.5), INDETERMINATE),
    (OrderFunction.constant(1.0), RECURRENT),
    (OrderFunction.constant(1.5), RECURRENT),
    (make_sharp_log_order(0.5, 1.5), RECURRENT),
    # R^(1 - alpha(R)) tends to e for eps = 1 but grows like exp(sqrt(log R)) for eps = 1/2
    (make_sharp_log_order(1.0, 1.0), RECURRENT),
    (make_sharp_log_order(0.5, 1.0), INDETERMINATE),
])
def test_u04_examples(order, want):
    assert classify_recurrence_u04(order).property == want


def test_u04_on_family_member():
    assert classify_recurrence_u04(build_member("prop16i", 3)).property == RECURRENT
    with pytest.raises(ValueError):
        classify_recurrence_u04(OrderFunction.constant(1.0), d=0)


# --- explosion --------------------------------------------------------------


@pytest.mark.parametrize("a,want", [
    (constant_diffusion(1.0), CONSERVATIVE),
    (make_prop15_coefficient("explosive_family", 1), EXPLOSIVE),
    (make_prop15_coefficient("explosive_family", 4), EXPLOSIVE),
    (make_prop15_coefficient("conservative_limit"), CONSERVATIVE),
    (make_prop15_coefficient("conservative_family", 2), CONSERVATIVE),
    (make_prop15_coefficient("explosive_limit"), EXPLOSIVE),
])
def test_feller_examples(a, want):
    c = feller_explosion_test(a)
    assert c.property == want
    assert len(c.evidence) == 2


def test_feller_rejects_non_positive_coefficients():
    bad = DiffusionCoefficient(1, lambda x: np.cos(x), name="cos")
    with pytest.raises(ValueError):
        feller_explosion_test(bad)
