import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from moscolab.coeffs import (CoefficientError, OrderFunction, check_assumption_sequence, constant_diffusion,
                             l1_local_distance, make_prop15_coefficient, make_prop18_kernel, make_sharp_log_order,
                             sine_perturbed_diffusion)
from moscolab.families import FAMILY_IDS, build_member, get_family


def test_sharp_log_order_value_at_origin():
    assert make_sharp_log_order(1.0, 1.0)(0.0) == pytest.approx(0.5, rel=1e-14)
    a = make_sharp_log_order(0.5, 1.5)
    assert a(0.0) == pytest.approx(1.5 - 2**-0.5, rel=1e-14)
    assert a.lower == pytest.approx(0.7929, abs=1e-4)


def test_sharp_log_order_increases_to_offset():
    a = make_sharp_log_order(1.0, 1.0)
    u = np.logspace(-3, 12, 400)
    vals = a(u)
    assert np.all(np.diff(vals) > 0)
    assert np.all(vals < 1.0)
    assert a.at_log(1e6) == pytest.approx(1.0 - 1e-6, rel=1e-12)


def test_sharp_log_order_rejections():
    with pytest.raises(CoefficientError):
        make_sharp_log_order(0.0)
    with pytest.raises(CoefficientError):
        make_sharp_log_order(2.0, 0.2)  # alpha(0) < 0
    with pytest.raises(CoefficientError):
        make_sharp_log_order(0.5, 2.1)
    # the supremum is not attained, so an offset of exactly 2 is admissible
    assert make_sharp_log_order(0.5, 2.0).upper == 2.0


def test_at_log_matches_direct_evaluation():
    a = make_sharp_log_order(0.7, 1.2)
    u = np.array([1e-8, 0.3, 5.0, 1e9])
    assert np.allclose(a.at_log(np.log(u)), a(u), rtol=1e-14)


def test_constant_and_param_orders():
    assert OrderFunction.constant(1.3)(np.array([0.0, 10.0])).tolist() == [1.3, 1.3]
    with pytest.raises(CoefficientError):
        OrderFunction.constant(2.0)
    p = OrderFunction.param("tanh", lambda u, a: 1.0 + a * np.tanh(u), (0.5,))
    assert p.lower == pytest.approx(1.0) and p.upper == pytest.approx(1.5, rel=1e-6)
    with pytest.raises(CoefficientError):
        OrderFunction.param("bad", lambda u: 1.0 + u)


@given(st.floats(0.05, 3.0), st.floats(0.0, 1e9))
@settings(max_examples=60, deadline=None)
def test_sharp_log_order_stays_within_bounds(eps, u):
    offset = 1.0
    if offset - 2.0**-eps <= 0:
        return
    a = make_sharp_log_order(eps, offset)
    val = float(a(u))
    assert a.lower - 1e-12 <= val < a.upper


def test_prop15_coefficient_values():
    assert make_prop15_coefficient("explosive_family", 1)(np.array([0.0]))[0] == pytest.approx(4 * math.log(2) ** 2)
    assert make_prop15_coefficient("conservative_limit")(np.array([0.0]))[0] == pytest.approx(4 * math.log(2))
    x = np.array([math.e - 2.0])
    assert make_prop15_coefficient("conservative_family", 2)(x)[0] == pytest.approx(math.exp(1.5), rel=1e-13)


def test_prop15_coefficient_rejects_bad_input():
    with pytest.raises(CoefficientError):
        make_prop15_coefficient("explosive_family")
    with pytest.raises(CoefficientError):
        make_prop15_coefficient("somewhere_else", 1)


def test_diffusion_ellipticity_and_symmetry():
    a = make_prop15_coefficient("conservative_limit")
    lam = a.local_ellipticity(3.0)
    assert 0 < lam <= 1
    assert a.is_symmetric(np.linspace(-2, 2, 5))
    assert constant_diffusion(2.0).local_ellipticity(1.0) == pytest.approx(0.5)


def test_sine_perturbation_needs_n_at_least_two():
    with pytest.raises(CoefficientError):
        sine_perturbed_diffusion(1)
    a = sine_perturbed_diffusion(4)
    assert a(np.array([math.pi / 2]))[0] == pytest.approx(1.25)


def test_prop18_kernel_is_symmetric_and_dominated():
    k = make_prop18_kernel(make_sharp_log_order(0.5, 1.5))
    rng = np.random.default_rng(3)
    x, y = rng.uniform(-20, 20, 500), rng.uniform(-20, 20, 500)
    assert np.allclose(k.density(x, y), k.density(y, x), rtol=0, atol=0)
    assert np.all(k.density(x, y) <= k.dominator(x, y) * (1 + 1e-12))
    with pytest.raises(CoefficientError):
        k.density(np.array([1.0]), np.array([1.0]))


def test_locality_integral_finite():
    k = make_prop18_kernel(make_sharp_log_order(0.5, 1.5))
    val = k.locality_integral(0.3)
    assert math.isfinite(val) and val > 0


def test_l1_distance_examples():
    f = lambda x: np.sin(x)
    assert l1_local_distance(f, f, [(0.0, 1.0)]) == 0.0
    for n in (1, 3, 10):
        d = l1_local_distance(lambda x, n=n: np.sin(x) + 1.0 / n, f, [(0.0, 1.0)])
        assert d == pytest.approx(1.0 / n, rel=1e-12)


def test_l1_distance_matrix_fields_and_errors():
    eye = lambda pts: np.broadcast_to(np.eye(2), (len(pts), 2, 2))
    twice = lambda pts: 2.0 * np.broadcast_to(np.eye(2), (len(pts), 2, 2))
    # Frobenius norm of I over the unit square
    assert l1_local_distance(twice, eye, [(0, 1), (0, 1)], resolution=16) == pytest.approx(math.sqrt(2))
    with pytest.raises(ValueError, match="non-finite"), np.errstate(divide="ignore"):
        l1_local_distance(lambda x: 1.0 / (x - 0.5 - 0.5 / 64), lambda x: 0 * x, [(0.0, 1.0)], resolution=64)


def test_exponent_distance_shrinks_along_family():
    from moscolab.levy import LevyExponent

    def phi(n):
        e = LevyExponent(1, build_member("prop16i", n))
        return lambda x: e.radial_values(x)

    lim = phi(None)
    assert l1_local_distance(phi(4), lim, [(-1, 1)], 64) < l1_local_distance(phi(1), lim, [(-1, 1)], 64)


def test_assumption_sequence_flags():
    f = lambda x: np.cos(x)
    same = check_assumption_sequence(lambda n: f, f, [(0, 1)], [1, 2, 4])
    assert same.flag == "vanishing" and max(same.distances) == 0
    shifted = check_assumption_sequence(lambda n: (lambda x: np.cos(x) + 1), f, [(0, 1)], [1, 2, 4])
    assert shifted.flag == "stalled"
    fam = get_family("prop16i")
    trend = check_assumption_sequence(fam, fam(None), [(0, 10)], [1, 2, 4, 8, 16])
    assert trend.vanishing
    assert all(b < a for a, b in zip(trend.distances, trend.distances[1:]))
    assert trend.distances[0] == pytest.approx(10.0, rel=1e-10)


def test_family_registry():
    assert set(FAMILY_IDS) >= {"prop15i", "prop16i", "prop16ii", "prop18i", "prop18ii", "const-alpha"}
    assert build_member("prop16ii", 2).params == (0.5, 1.0)
    with pytest.raises(CoefficientError):
        build_member("prop16ii", 1)
    with pytest.raises(CoefficientError):
        build_member("const-alpha")
    assert build_member("const-alpha", 1.5).alpha == 1.5
    with pytest.raises(CoefficientError):
        get_family("prop99")
