import csv
import math

import numpy as np
import pytest

from moscolab.coeffs import constant_diffusion, sine_perturbed_diffusion
from moscolab.families import build_member
from moscolab.forms import KILLING, PERIODIC, Grid1D, assemble_diffusion, assemble_jump, symbol_form
from moscolab.invariants import laplace_consistency, semigroup_markov
from moscolab.mosco import (PROXY_NOTE, ConvergenceReport, MoscoEntry, gaussian_bump, mosco_diagnostic,
                            resolvent, run_mosco, semigroup_apply, decreasing_trend)
from moscolab.solvers import SolverError, conjugate_gradient


def heat_form(points=512, half_width=10.0, boundary=PERIODIC):
    return assemble_diffusion(constant_diffusion(1.0), Grid1D(half_width, points, boundary))


def test_zero_form_resolvent_is_scaling():
    g = Grid1D(5.0, 64)
    f = gaussian_bump(g.nodes)
    sol = resolvent(symbol_form(np.zeros(64), g), 4.0, f)
    assert np.allclose(sol.u, f / 4.0, rtol=1e-14)


@pytest.mark.parametrize("lam", [0.5, 1.0, 7.0])
def test_constants_are_fixed_by_periodic_resolvent(lam):
    form = heat_form(128)
    sol = resolvent(form, lam, np.ones(128))
    assert np.allclose(sol.u, 1.0 / lam, rtol=1e-9)
    assert sol.residual <= 1e-10


def test_resolvent_preserves_positivity():
    for form in (heat_form(256, boundary=KILLING), assemble_jump(build_member("prop18i", 2), Grid1D(10.0, 256))):
        f = gaussian_bump(form.grid.nodes)
        assert resolvent(form, 1.0, f).u.min() >= -1e-12


def test_resolvent_input_checks():
    form = heat_form(64)
    with pytest.raises(ValueError):
        resolvent(form, 0.0, np.ones(64))
    with pytest.raises(ValueError):
        resolvent(form, 1.0, np.ones(10))
    assert np.all(resolvent(form, 1.0, np.zeros(64)).u == 0)


def test_semigroup_small_time_limit():
    form = heat_form(256)
    f = gaussian_bump(form.grid.nodes)
    err = [form.grid.norm(semigroup_apply(form, t, f) - f) / form.grid.norm(f) for t in (1e-1, 1e-2, 1e-3)]
    assert err[0] > err[1] > err[2] and err[2] < 1e-2


def test_semigroup_conserves_mass_and_spreads_like_heat():
    # generator u'' : a density with variance s^2 has variance s^2 + 2 t at time t
    form = heat_form(1024, half_width=20.0)
    x, h = form.grid.nodes, form.grid.spacing
    f = gaussian_bump(x)
    t = 1.5
    u = semigroup_apply(form, t, f, steps=400)
    # each of the 400 implicit steps is solved to a relative residual of 1e-10
    assert h * u.sum() == pytest.approx(h * f.sum(), rel=400 * 1e-10)
    var = lambda w: float((x**2 * w).sum() / w.sum())
    assert var(u) == pytest.approx(0.5 + 2 * t, rel=1e-2)


def test_semigroup_checks():
    form = heat_form(64)
    with pytest.raises(ValueError):
        semigroup_apply(form, 0.0, np.ones(64))
    with pytest.raises(ValueError):
        semigroup_apply(form, 1.0, np.ones(64), steps=0)
    assert semigroup_markov(heat_form(128, boundary=KILLING)).passed
    assert laplace_consistency(heat_form(128)).passed


def test_identical_members_converge_immediately():
    limit = heat_form(128)
    report = mosco_diagnostic([(1, limit), (2, limit)], limit, lambdas=(1.0, 2.0), f_ids=("gauss", "step"))
    assert report.verdict == "ConvergenceObserved"
    assert all(e.resolvent_err == 0 and e.semigroup_err == 0 and e.energy_err == 0 for e in report.entries)
    assert len(report.entries) == 2 * 2 * 2
    assert report.note == PROXY_NOTE


def test_diagnostic_rejects_mismatched_input():
    limit = heat_form(128)
    other = heat_form(256)
    with pytest.raises(ValueError):
        mosco_diagnostic([], limit)
    with pytest.raises(ValueError):
        mosco_diagnostic([(1, other)], limit)
    with pytest.raises(ValueError):
        mosco_diagnostic([(1, limit)], limit, lambdas=(1.0,), times=(1.0, 2.0))


def test_sine_family_errors_shrink_and_csv(tmp_path):
    def builder(n, g):
        return assemble_diffusion(constant_diffusion(1.0) if n is None else sine_perturbed_diffusion(n), g)

    report = run_mosco(builder, [2, 4, 8, 16], Grid1D(10.0, 512, KILLING), scenario="sine")
    errs = [report.max_resolvent_error(n) for n in report.indices]
    assert all(b < a for a, b in zip(errs, errs[1:]))
    assert decreasing_trend(report)
    assert report.window_sensitivity is not None and report.window_sensitivity < 0.5
    path = tmp_path / "m.csv"
    report.write_csv(path)
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["scenario", "n", "lambda", "f_id", "energy_err", "resolvent_err", "semigroup_err"]
    assert len(rows) == 1 + 4 and rows[1][0] == "sine"


def _report(errs):
    entries = [MoscoEntry(n, 1.0, 1.0, "gauss", 0.0, e, 0.0) for n, e in zip((1, 2, 4, 8), errs)]
    return ConvergenceReport("synthetic", entries, "Stalled", 1e-2)


@pytest.mark.parametrize("errs,want", [((0.8, 0.4, 0.2, 0.1), True), ((0.8, 0.7, 0.6, 0.5), False),
                                       ((0.8, 0.4, 0.5, 0.1), False), ((0.3, 0.0, 0.0, 0.0), True)])
def test_decreasing_trend(errs, want):
    assert decreasing_trend(_report(errs)) is want


def test_decreasing_trend_needs_two_points():
    assert not decreasing_trend(_report((0.1,)))


def test_conjugate_gradient_matches_dense_solve():
    rng = np.random.default_rng(0)
    a = rng.standard_normal((60, 60))
    a = a @ a.T + 60 * np.eye(60)
    b = rng.standard_normal(60)
    x, res, its = conjugate_gradient(lambda v: a @ v, b, diag=np.diag(a), rtol=1e-12)
    assert np.allclose(x, np.linalg.solve(a, b), rtol=1e-9)
    assert res <= 1e-12 and 0 < its <= 60 * 20


def test_conjugate_gradient_reports_failure():
    a = np.diag(np.logspace(0, 8, 200))
    with pytest.raises(SolverError) as info:
        conjugate_gradient(lambda v: a @ v, np.ones(200), rtol=1e-14, maxiter=3)
    assert info.value.iterations >= 3 and math.isfinite(info.value.residual)
