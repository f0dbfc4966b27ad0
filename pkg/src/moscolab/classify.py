"""Recurrence/transience and conservativeness/explosion by integral tests.

All tests reduce to deciding whether an improper integral of a positive
function converges. :func:`classify_tail` does that by fitting the local
log-log slope of the integrand far out in the tail; slopes close to -1 are
resolved by the substitution ``u = e^s``, which turns logarithmic
corrections into power laws, and the fit is repeated one level down.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .coeffs import DiffusionCoefficient, OrderFunction, make_sharp_log_order
from .constants import (TAIL_BAND, TAIL_FIT_WINDOW, TAIL_LOG_HORIZON, TAIL_MAX_DEPTH, TAIL_R_MAX,
                        U04_R_MAX, U04_SLACK, U04_WINDOW)
from .levy import LevyExponent, _panel_nodes, radial_moment, sphere_area

CONVERGENT = "Convergent"
DIVERGENT = "Divergent"
INCONCLUSIVE = "Inconclusive"

RECURRENT = "Recurrent"
TRANSIENT = "Transient"
CONSERVATIVE = "Conservative"
EXPLOSIVE = "Explosive"
INDETERMINATE = "Indeterminate"

RECURRENCE_METHODS = ("ChungFuchs", "U04Criterion", "SharpEpsilon")
FELLER = "FellerTest"

# log-variable horizon for deeper levels when the caller supplies log g directly
EXTENDED_LOG_HORIZON = 1e4
# checkpoints per substitution level
LEVEL_POINTS = 12
# slope changes below this are treated as fit noise
SLOPE_NOISE = 1e-3


@dataclass(frozen=True)
class Domain:
    """Improper end of the integral: ``("infinity", R0)`` or ``("zero", r)``."""

    kind: str
    start: float

    def __post_init__(self):
        if self.kind not in ("infinity", "zero"):
            raise ValueError(f"unknown domain kind {self.kind!r}")
        if not self.start > 0:
            raise ValueError("domain start must be positive")


def at_infinity(r0: float = 1.0) -> Domain:
    return Domain("infinity", r0)


def at_zero(r: float = 1.0) -> Domain:
    return Domain("zero", r)


@dataclass(frozen=True)
class TailVerdict:
    """Outcome of a tail test.

    ``fitted_exponents`` holds one slope per level, always for the integrand
    mapped to an upper tail (an integral at zero is mapped by ``u = 1/x``),
    so ``< -1`` means convergence at every level.
    """

    verdict: str
    depth: int
    partials: tuple[tuple[float, float], ...]
    fitted_exponents: tuple[float, ...]
    max_depth: int = TAIL_MAX_DEPTH

    @property
    def last_partial(self) -> float:
        return self.partials[-1][1] if self.partials else float("nan")


def _fit_slope(x, y) -> float:
    return float(np.polyfit(x, y, 1)[0])


def classify_tail(g: Callable | None, domain: Domain, max_depth: int = TAIL_MAX_DEPTH, *,
                  log_g: Callable[[float], float] | None = None, band: float = TAIL_BAND,
                  r_max: float = TAIL_R_MAX, window: int = TAIL_FIT_WINDOW,
                  log_horizon: float | None = None, partial_nodes: int = 8) -> TailVerdict:
    """Decide whether ``int g`` converges at the improper end of ``domain``.

    Level 0 fits the log-log slope ``p`` of the integrand on the last
    ``window`` checkpoints ``R0 * 2^k <= r_max`` (``r * 2^-k`` at zero).
    ``p < -1 - band`` means convergent, ``p > -1 + band`` divergent; a slope
    inside the band, or one drifting across the band within the window,
    triggers ``u = e^s`` and a refit, up to ``max_depth`` substitutions.

    ``log_g(t)`` may be given instead of (or besides) ``g`` as
    ``log g(exp(t))``; it lets deeper levels reach arguments that do not fit
    in a float.
    """
    if max_depth < 1:
        raise ValueError("max_depth must be at least 1")
    if g is None and log_g is None:
        raise ValueError("need g or log_g")

    def log_native(t):
        if log_g is not None:
            val = float(log_g(t))
        else:
            x = math.exp(t)
            gv = float(g(x))
            if not (math.isfinite(gv) and gv > 0):
                raise ValueError(f"integrand is not finite and positive at x = {x!r} (value {gv!r})")
            val = math.log(gv)
        if not math.isfinite(val):
            raise ValueError(f"integrand is not finite and positive at log x = {t!r}")
        return val

    # level 0 in the upper-tail frame: ell(s) = log G(e^s)
    if domain.kind == "infinity":
        ell0 = log_native
        s_start = math.log(domain.start)
    else:
        ell0 = lambda s: log_native(-s) - 2.0 * s
        s_start = -math.log(domain.start)
    doublings = int(math.floor(math.log2(r_max / 1.0))) if domain.kind == "zero" else \
        int(math.floor(math.log2(r_max / domain.start)))
    if doublings < window:
        raise ValueError("r_max leaves too few checkpoints for the fit window")
    s_pts = s_start + math.log(2.0) * np.arange(doublings + 1)
    horizon = log_horizon if log_horizon is not None else (
        EXTENDED_LOG_HORIZON if log_g is not None else TAIL_LOG_HORIZON)

    partials = _partials(ell0, s_pts, domain, partial_nodes)
    exponents = []
    ell = ell0
    points = s_pts
    # +1 / -1 once some level's slope was seen rising / falling across the band
    drift = 0
    for level in range(max_depth + 1):
        vals = np.array([ell(s) for s in points])
        w = min(window, len(points))
        xs, ys = points[-w:], vals[-w:]
        p = _fit_slope(xs, ys)
        exponents.append(p)
        half = max(2, w // 2)
        p_head = _fit_slope(xs[:half], ys[:half])
        p_tail = _fit_slope(xs[-half:], ys[-half:])
        rising, falling = p_tail > p_head + band, p_tail < p_head - band
        verdict = None
        if p < -1.0 - band and not rising:
            verdict = CONVERGENT
        elif p > -1.0 + band and not falling:
            verdict = DIVERGENT
        if verdict is not None:
            # a substitution cannot undo a slope that was still moving: a verdict
            # against the direction of an earlier drift is not trusted
            if (verdict == DIVERGENT and drift < 0) or (verdict == CONVERGENT and drift > 0):
                break
            # below level 0 a negative slope that keeps falling is a stretched
            # exponential in disguise: it may still steepen past -1
            if verdict == DIVERGENT and level > 0 and p < 0 and p_tail < p_head - SLOPE_NOISE:
                break
            return TailVerdict(verdict, level, partials, tuple(exponents), max_depth)
        if abs(p + 1.0) > band:
            drift = 1 if rising else -1
        if level == max_depth:
            break
        # substitute x = e^y: new log-log integrand ell'(sigma) = ell(e^sigma) + e^sigma;
        # the new level covers the old fit window and continues to the horizon
        ell = (lambda f: (lambda sigma: f(math.exp(sigma)) + math.exp(sigma)))(ell)
        hi = horizon if level == 0 else points[-1]
        lo = max(1.0, min(xs[0], 0.25 * hi))
        if hi <= 2.0 * lo:
            break
        points = np.log(np.geomspace(lo, hi, LEVEL_POINTS))
    return TailVerdict(INCONCLUSIVE, max_depth, partials, tuple(exponents), max_depth)


def _partials(ell0, s_pts, domain, nodes):
    """Partial integrals up to each checkpoint, in the caller's variable."""
    x, wt = _panel_nodes(s_pts, nodes)
    vals = np.array([[math.exp(ell0(s) + s) for s in row] for row in x])
    cum = np.cumsum(np.sum(vals * wt, axis=1))
    if domain.kind == "infinity":
        cutoffs = np.exp(s_pts[1:])
    else:
        cutoffs = np.exp(-s_pts[1:])
    return tuple((float(c), float(v)) for c, v in zip(cutoffs, cum))


@dataclass(frozen=True)
class PathClassification:
    property: str
    method: str
    evidence: tuple = field(default=())
    note: str = ""

    def __post_init__(self):
        if self.property in (RECURRENT, TRANSIENT) and self.method not in RECURRENCE_METHODS:
            raise ValueError(f"{self.property} must come from a recurrence method, not {self.method}")
        if self.property in (CONSERVATIVE, EXPLOSIVE) and self.method != FELLER:
            raise ValueError(f"{self.property} must come from the Feller test")

    @property
    def depth(self) -> int | None:
        return max((v.depth for v in self.evidence), default=None)

    @property
    def last_partial(self) -> float | None:
        return self.evidence[0].last_partial if self.evidence else None

    def csv_row(self, scenario: str, param) -> list:
        """``scenario, n_or_eps, method, verdict, depth, last_partial``."""
        depth = "" if self.depth is None else self.depth
        last = "" if self.last_partial is None else f"{self.last_partial:.12e}"
        return [scenario, param, self.method, self.property, depth, last]


# --- recurrence -----------------------------------------------------------------


def _window_bounded(values, window: int, slack: float) -> bool:
    """Flat-or-decreasing test on the last ``window`` values of a positive sequence."""
    values = np.asarray(values)
    head, tail = values[:-window], values[-window:]
    if np.all(np.diff(tail) <= 0):
        return True
    if len(head) == 0:
        return False
    return bool(tail.max() <= (1.0 + slack) * head.max())


@dataclass(frozen=True)
class U04Quantities:
    radii: tuple
    growth: tuple
    tail: tuple


def u04_quantities(alpha: OrderFunction, d: int = 1, r_max: float = U04_R_MAX) -> U04Quantities:
    """``R^(d-2) int_0^R u^(1-alpha) du`` and ``R^d int_R^inf u^(-1-alpha) du`` at ``R = 2^k``."""
    k = np.arange(int(math.floor(math.log2(r_max))) + 1)
    radii = 2.0 ** k
    inner = np.empty(len(radii))
    inner[0] = radial_moment(alpha, 0.0, radii[0], power=2.0)
    for i in range(1, len(radii)):
        inner[i] = inner[i - 1] + radial_moment(alpha, radii[i - 1], radii[i], power=2.0)
    outer = np.empty(len(radii))
    outer[-1] = radial_moment(alpha, radii[-1], math.inf, power=0.0)
    for i in range(len(radii) - 2, -1, -1):
        outer[i] = outer[i + 1] + radial_moment(alpha, radii[i], radii[i + 1], power=0.0)
    return U04Quantities(tuple(radii), tuple(radii ** (d - 2) * inner), tuple(radii**d * outer))


def classify_recurrence_u04(alpha: OrderFunction, d: int = 1, r_max: float = U04_R_MAX) -> PathClassification:
    """Sufficient recurrence test: both quantities stay bounded as ``R -> inf``.

    Never returns Transient; failure of the test is Indeterminate.
    """
    if d < 1:
        raise ValueError("dimension must be at least 1")
    q = u04_quantities(alpha, d, r_max)
    ok_growth = _window_bounded(q.growth, U04_WINDOW, U04_SLACK)
    ok_tail = _window_bounded(q.tail, U04_WINDOW, U04_SLACK)
    note = f"growth[-1]={q.growth[-1]:.6g} ({'bounded' if ok_growth else 'growing'}); " \
           f"tail[-1]={q.tail[-1]:.6g} ({'bounded' if ok_tail else 'growing'})"
    if ok_growth and ok_tail:
        return PathClassification(RECURRENT, "U04Criterion", (), note)
    return PathClassification(INDETERMINATE, "U04Criterion", (), note)


def classify_chung_fuchs(e: LevyExponent, r: float = 1.0, **tail_kwargs) -> PathClassification:
    """Recurrent iff ``int_{|xi|<r} d xi / phi(xi)`` diverges.

    In dimension ``d`` the radial integrand is ``S_d rho^(d-1) / phi(rho)``.
    """
    d = e.dimension
    log_area = math.log(sphere_area(d))

    def log_g(t):
        # log of S_d rho^(d-1) / phi(rho) at rho = e^t
        log_phi = e.log_value_at_log(t)
        if not math.isfinite(log_phi):
            raise ValueError(f"phi vanished at xi = exp({t})")
        return log_area + (d - 1) * t - log_phi

    for rho in r * 2.0 ** -np.arange(0, 8):
        if not e.radial_values(np.array([rho]))[0] > 0:
            raise ValueError(f"phi is not positive at |xi| = {rho}")
    verdict = classify_tail(None, at_zero(r), log_g=log_g, **tail_kwargs)
    prop = {DIVERGENT: RECURRENT, CONVERGENT: TRANSIENT}.get(verdict.verdict, INDETERMINATE)
    return PathClassification(prop, "ChungFuchs", (verdict,))


def classify_sharp_epsilon(eps: float, corroborate: bool = True) -> PathClassification:
    """``alpha(u) = 1 - log(u + e^2)^(-eps)`` in d = 1 is recurrent iff ``eps >= 1``."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    evidence = ()
    note = ""
    if corroborate:
        cf = classify_chung_fuchs(LevyExponent(1, make_sharp_log_order(eps, 1.0)))
        evidence = cf.evidence
        note = f"chung-fuchs: {cf.property}"
    prop = RECURRENT if eps >= 1 else TRANSIENT
    return PathClassification(prop, "SharpEpsilon", evidence, note)


def classical_stable_recurrent(alpha: float, d: int) -> bool:
    """Symmetric alpha-stable on R^d is recurrent iff ``d = 1 <= alpha <= 2`` or ``d = alpha = 2``."""
    return (d == 1 and 1.0 <= alpha <= 2.0) or (d == 2 and alpha == 2.0)


# --- explosion ------------------------------------------------------------------


def feller_explosion_test(a: DiffusionCoefficient, r0: float = 1.0, **tail_kwargs) -> PathClassification:
    """Feller test for the generator ``(a u')'`` on R.

    With scale density ``1/a`` and Lebesgue speed measure the test integral
    is ``int^{+-inf} |y| / a(y) dy``; convergence at either end means
    explosion.
    """
    if a.dimension != 1:
        raise ValueError("the Feller test is one-dimensional")

    def side(sign):
        def g(y):
            val = float(a(np.array([sign * y]))[0])
            if not val > 0:
                raise ValueError(f"diffusion coefficient is not positive at x = {sign * y!r}")
            return y / val
        return classify_tail(g, at_infinity(r0), **tail_kwargs)

    plus, minus = side(1.0), side(-1.0)
    verdicts = {plus.verdict, minus.verdict}
    if CONVERGENT in verdicts:
        prop = EXPLOSIVE
    elif verdicts == {DIVERGENT}:
        prop = CONSERVATIVE
    else:
        prop = INDETERMINATE
    return PathClassification(prop, FELLER, (plus, minus))
