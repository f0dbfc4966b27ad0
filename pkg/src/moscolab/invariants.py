"""Property suites over forms, solvers and classifiers.

Each check returns an :class:`InvariantResult`; :func:`run_invariant_suite`
collects them for the command line and for the test-suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .classify import (CONVERGENT, DIVERGENT, TRANSIENT, at_infinity, classify_recurrence_u04, classify_tail,
                       feller_explosion_test)
from .coeffs import (DiffusionCoefficient, JumpKernel, OrderFunction, constant_diffusion, make_prop15_coefficient,
                     make_sharp_log_order)
from .families import build_member
from .forms import KILLING, PERIODIC, Grid1D, GridForm, assemble_diffusion, assemble_jump, assemble_multiplier, energy
from .levy import LevyExponent
from .mosco import gaussian_bump, resolvent, semigroup_apply

RANDOM_VECTORS = 100
SEED = 20240611


@dataclass(frozen=True)
class InvariantResult:
    name: str
    passed: bool
    detail: str


def _result(name, passed, detail):
    return InvariantResult(name, bool(passed), detail)


# --- forms --------------------------------------------------------------------


def form_structure(form: GridForm, vectors: int = RANDOM_VECTORS, seed: int = SEED, tol: float = 1e-10):
    """Symmetry, non-negative energy on random vectors and non-positive off-diagonals.

    The sign test is skipped for multipliers with a Gaussian part, whose
    discrete second derivative in Fourier form has positive off-diagonals.
    """
    m = form.to_dense()
    scale = float(np.abs(m).max()) or 1.0
    asym = float(np.abs(m - m.T).max()) / scale
    rng = np.random.default_rng(seed)
    us = rng.standard_normal((vectors, form.grid.points))
    energies = np.array([energy(form, u) for u in us])
    norms = form.grid.spacing * np.sum(us**2, axis=1)
    min_ratio = float((energies / norms).min())
    off = m - np.diag(np.diag(m))
    worst_off = float(off.max()) / scale
    checks = [asym <= tol, min_ratio >= -tol * scale]
    if not form.has_gaussian_part:
        checks.append(worst_off <= tol)
    detail = f"asymmetry {asym:.1e}, min energy/norm {min_ratio:.3e}, max off-diagonal {worst_off:.1e}"
    return _result(f"structure of {form.family} form {form.label}", all(checks), detail)


def resolvent_identity(form: GridForm, lam: float = 1.0, mu: float = 3.0, seed: int = SEED, tol: float = 1e-8):
    """``G_lam f - G_mu f = (mu - lam) G_lam G_mu f`` on a random ``f``."""
    f = np.random.default_rng(seed).standard_normal(form.grid.points)
    g_mu = resolvent(form, mu, f).u
    lhs = resolvent(form, lam, f).u - g_mu
    rhs = (mu - lam) * resolvent(form, lam, g_mu).u
    err = float(np.linalg.norm(lhs - rhs) / np.linalg.norm(rhs))
    return _result(f"resolvent identity ({form.family})", err <= tol, f"relative defect {err:.2e}")


def resolvent_contraction(form: GridForm, lambdas=(1.0, 10.0, 100.0, 1000.0)):
    """``||lam G_lam f|| <= ||f||`` and ``lam G_lam f -> f`` with decreasing error."""
    f = gaussian_bump(form.grid.nodes)
    nf = form.grid.norm(f)
    errs, ok = [], True
    for lam in lambdas:
        u = lam * resolvent(form, lam, f).u
        ok &= form.grid.norm(u) <= nf * (1 + 1e-10)
        errs.append(form.grid.norm(u - f) / nf)
    ok &= all(b < a for a, b in zip(errs, errs[1:]))
    return _result(f"contraction and strong continuity ({form.family})", ok,
                   "errors " + ", ".join(f"{e:.2e}" for e in errs))


def semigroup_markov(form: GridForm, t: float = 1.0, steps: int = 32, tol: float = 1e-10):
    """``0 <= f <= 1`` implies ``0 <= P_t f <= 1``."""
    x = form.grid.nodes
    f = np.clip(1.5 - np.abs(x), 0.0, 1.0)
    u = semigroup_apply(form, t, f, steps)
    lo, hi = float(u.min()), float(u.max())
    return _result(f"sub-Markov semigroup ({form.family})", lo >= -tol and hi <= 1 + tol,
                   f"range [{lo:.3e}, {hi:.6f}]")


def laplace_consistency(form: GridForm, lam: float = 1.0, nodes: int = 32, steps: int = 256, rtol: float = 1e-2):
    """``int_0^inf e^(-lam t) P_t f dt`` by Gauss-Laguerre against ``G_lam f``."""
    f = gaussian_bump(form.grid.nodes)
    s, w = np.polynomial.laguerre.laggauss(nodes)
    acc = sum(wi / lam * semigroup_apply(form, si / lam, f, steps) for si, wi in zip(s, w))
    ref = resolvent(form, lam, f).u
    err = form.grid.norm(acc - ref) / form.grid.norm(ref)
    return _result(f"semigroup-resolvent consistency ({form.family})", err <= rtol, f"relative gap {err:.2e}")


def dominating_kernel(kernel: JumpKernel) -> JumpKernel:
    """``(1 + C) max(r^(-1-lower), r^(-1-upper))`` written as a jump kernel with a step order."""
    lo, hi = kernel.order.lower, kernel.order.upper
    step = OrderFunction.param("dominator", lambda u, a=lo, b=hi: np.where(np.asarray(u) < 1.0, b, a) + 0.0 * u)
    c_max = kernel.c_bounds[1]
    return JumpKernel(step, lambda x, c=c_max: np.full_like(np.asarray(x, dtype=float), c), (c_max, c_max),
                      kernel.dimension, name="dominator")


def monotone_domination(kernel: JumpKernel, grid: Grid1D, seed: int = SEED, vectors: int = 20):
    """A dominated kernel gives smaller energies and larger resolvent quadratic forms."""
    small = assemble_jump(kernel, grid)
    big = assemble_jump(dominating_kernel(kernel), grid)
    rng = np.random.default_rng(seed)
    ok = True
    for _ in range(vectors):
        u = rng.standard_normal(grid.points)
        ok &= energy(small, u) <= energy(big, u) * (1 + 1e-12)
    f = gaussian_bump(grid.nodes)
    q_small = float(f @ resolvent(small, 1.0, f).u)
    q_big = float(f @ resolvent(big, 1.0, f).u)
    ok &= q_small >= q_big
    return _result(f"monotone domination ({kernel.name})", ok, f"<f, G f>: {q_small:.6f} >= {q_big:.6f}")


# --- classifiers --------------------------------------------------------------


def tail_exactness():
    cases = [(p, CONVERGENT if p < -1 else DIVERGENT) for p in (-3.0, -2.0, -1.5, -0.5, 0.0)]
    got = []
    ok = True
    for p, want in cases:
        v = classify_tail(lambda u, p=p: u**p, at_infinity(1.0))
        ok &= v.verdict == want and v.depth == 0
        got.append(f"{p:g}:{v.verdict}")
    for name, g, want in (("1/(u log u)", lambda u: 1.0 / (u * math.log(u)), DIVERGENT),
                          ("1/(u log^2 u)", lambda u: 1.0 / (u * math.log(u) ** 2), CONVERGENT)):
        v = classify_tail(g, at_infinity(math.exp(2.0)))
        ok &= v.verdict == want
        got.append(f"{name}:{v.verdict}")
    return _result("tail classifier on powers and log-borderline pair", ok, ", ".join(got))


def tail_scale_invariance():
    ok = True
    for p in (-2.0, -1.0, -0.5):
        a = classify_tail(lambda u: u**p, at_infinity(1.0))
        b = classify_tail(lambda u: 7.0 * u**p, at_infinity(1.0))
        ok &= a.verdict == b.verdict
    return _result("tail classifier ignores constant factors", ok, "g vs 7 g at p = -2, -1, -0.5")


def u04_never_transient():
    orders = [OrderFunction.constant(a) for a in (0.3, 0.5, 1.0, 1.5)] + \
             [make_sharp_log_order(e, 1.0) for e in (0.5, 1.0)]
    props = [classify_recurrence_u04(o).property for o in orders]
    return _result("U04 criterion is sufficient only", TRANSIENT not in props, ", ".join(props))


def feller_time_change():
    ok = True
    coefs = [make_prop15_coefficient("explosive_family", 1), make_prop15_coefficient("conservative_limit"),
             constant_diffusion(1.0)]
    for a in coefs:
        doubled = DiffusionCoefficient(1, lambda x, a=a: 2.0 * a(x), name=f"2*{a.name}")
        ok &= feller_explosion_test(a).property == feller_explosion_test(doubled).property
    return _result("Feller verdicts are invariant under a -> 2a", ok, ", ".join(a.name for a in coefs))


def default_forms(points: int = 128, half_width: float = 10.0) -> list[GridForm]:
    per = Grid1D(half_width, points, PERIODIC)
    kill = per.with_boundary(KILLING)
    kernel = build_member("prop18i", 2)
    return [
        assemble_diffusion(make_prop15_coefficient("conservative_limit"), kill),
        assemble_diffusion(constant_diffusion(1.0), per),
        assemble_jump(kernel, per),
        assemble_jump(kernel, kill),
        assemble_multiplier(LevyExponent(1, make_sharp_log_order(0.5, 1.5)), per),
        assemble_multiplier(LevyExponent(1, gaussian=2.0), per),
    ]


def run_invariant_suite(points: int = 128) -> list[InvariantResult]:
    forms = default_forms(points)
    out = []
    for form in forms:
        out.append(form_structure(form))
        out.append(resolvent_identity(form))
        out.append(resolvent_contraction(form))
        if not form.has_gaussian_part:
            out.append(semigroup_markov(form))
    out.append(laplace_consistency(forms[1]))
    out.append(laplace_consistency(forms[4]))
    out.append(monotone_domination(build_member("prop18i", 2), Grid1D(10.0, points, PERIODIC)))
    out.extend([tail_exactness(), tail_scale_invariance(), u04_never_transient(), feller_time_change()])
    return out


CHECKS: dict[str, Callable] = {"suite": run_invariant_suite}
