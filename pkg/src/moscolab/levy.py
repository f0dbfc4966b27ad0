"""Characteristic exponents of symmetric Levy measures with variable order.

The exponent is

    phi(xi) = 1/2 <S xi, xi> + kappa * int_{R^d} (1 - cos<xi, h>) |h|^(-d - alpha(|h|)) dh

for an order function ``alpha`` and an optional Gaussian matrix ``S``.

The jump integral is computed in the scaled radial variable ``t = |xi| r``,
which keeps every integrand of order one however small ``|xi|`` is:

    int = kappa * S_d * |xi|^alpha(1/|xi|) * int_0^inf K_d(t) w(t) dt

with ``K_d(t) = 1 - Lambda_d(t)`` the spherical average of ``1 - cos`` and
``w`` the rescaled radial density. The t-axis is cut into three pieces:

* ``(0, pi]``: graded panels in ``log t`` plus an analytic remainder with the
  order frozen at the cut;
* ``[pi, T]``: uniform Gauss-Legendre panels of width about ``pi / 2``;
* ``[T, inf)``: the non-oscillatory part ``int w`` on ``log t`` panels and the
  oscillatory part ``int Lambda_d w`` summed half-period by half-period and
  accelerated by repeated averaging of partial sums (Euler transform).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import special

from .coeffs import OrderFunction


class QuadratureError(RuntimeError):
    """Quadrature did not reach the requested tolerance within the panel budget."""

    def __init__(self, message: str, estimate: float, error_bound: float):
        super().__init__(f"{message} (estimate={estimate!r}, error bound={error_bound!r})")
        self.estimate = estimate
        self.error_bound = error_bound


@dataclass(frozen=True)
class QuadratureProfile:
    rtol: float = 1e-10
    nodes: int = 24
    max_panels: int = 4000
    periods: int = 4
    tail_terms: int = 48


DEFAULT_PROFILE = QuadratureProfile()


@lru_cache(maxsize=None)
def _gauss_legendre(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def _panel_nodes(edges: np.ndarray, n: int):
    """Nodes and weights of n-point Gauss-Legendre rules on consecutive panels."""
    x, w = _gauss_legendre(n)
    a, b = edges[:-1, None], edges[1:, None]
    half = 0.5 * (b - a)
    return (a + half * (x + 1.0)), half * w


def sphere_area(d: int) -> float:
    """Surface measure of the unit sphere in R^d (2 for d = 1)."""
    return 2.0 * math.pi ** (d / 2) / math.gamma(d / 2)


def _angular_cos(t, d: int):
    """Spherical average of ``cos(t * omega_1)``."""
    if d == 1:
        return np.cos(t)
    nu = d / 2 - 1
    t = np.asarray(t, dtype=float)
    out = np.ones_like(t)
    big = t > 0
    tb = t[big]
    out[big] = math.gamma(d / 2) * (2.0 / tb) ** nu * special.jv(nu, tb)
    return out


def _angular_one_minus_cos(t, d: int):
    """``1 - Lambda_d(t)`` without cancellation for small ``t``."""
    t = np.asarray(t, dtype=float)
    if d == 1:
        return 2.0 * np.sin(0.5 * t) ** 2
    small = t < 1e-2
    out = np.empty_like(t)
    ts = t[small] ** 2
    out[small] = ts / (2 * d) - ts**2 / (8 * d * (d + 2)) + ts**3 / (48 * d * (d + 2) * (d + 4))
    out[~small] = 1.0 - _angular_cos(t[~small], d)
    return out


def _log_angular_one_minus_cos(log_t, d: int):
    """``log(1 - Lambda_d(t))`` from ``log t``, accurate where ``t`` underflows."""
    log_t = np.asarray(log_t, dtype=float)
    out = np.empty_like(log_t)
    small = log_t < math.log(1e-2)
    ts = np.exp(2.0 * log_t[small])
    ratio = 1.0 - ts / (4 * (d + 2)) + ts**2 / (24 * (d + 2) * (d + 4))
    out[small] = 2.0 * log_t[small] - math.log(2 * d) + np.log(ratio)
    out[~small] = np.log(_angular_one_minus_cos(np.exp(log_t[~small]), d))
    return out


@dataclass(frozen=True)
class LevyExponent:
    """Exponent of the symmetric Levy measure ``kappa |h|^(-d-alpha(|h|)) dh`` plus ``S``.

    ``order=None`` gives a purely Gaussian exponent. ``gaussian`` may be a
    scalar (meaning ``S = gaussian * I``) or a ``d x d`` matrix.
    """

    dimension: int = 1
    order: OrderFunction | None = None
    gaussian: float | np.ndarray | None = None
    scale: float = 1.0
    profile: QuadratureProfile = DEFAULT_PROFILE
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("dimension must be at least 1")
        if self.order is None and self.gaussian is None:
            raise ValueError("exponent needs a jump part, a Gaussian part, or both")
        if self.gaussian is not None:
            s = self._gaussian_matrix()
            if not np.allclose(s, s.T) or np.linalg.eigvalsh(s).min() < -1e-12:
                raise ValueError("Gaussian part must be symmetric non-negative definite")

    def _gaussian_matrix(self) -> np.ndarray:
        s = np.asarray(self.gaussian, dtype=float)
        if s.ndim == 0:
            return float(s) * np.eye(self.dimension)
        return s

    def describe(self) -> str:
        parts = []
        if self.gaussian is not None:
            parts.append(f"S={np.asarray(self.gaussian).tolist()}")
        if self.order is not None:
            parts.append(f"alpha={self.order.describe()}")
        return f"phi[d={self.dimension}; {', '.join(parts)}]"

    # the jump integral depends on |xi| only
    def _jump_radial(self, r: float):
        key = float(r)
        hit = self._cache.get(key)
        if hit is None:
            hit = _scaled_jump_integral(self.order, self.dimension, math.log(r), self.profile)
            self._cache[key] = hit
        return hit

    def evaluate(self, xi) -> tuple[float, float]:
        """Return ``(phi(xi), error_bound)``."""
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        if xi.shape != (self.dimension,):
            raise ValueError(f"expected a point of R^{self.dimension}, got shape {xi.shape}")
        if not np.all(np.isfinite(xi)):
            raise ValueError("xi must be finite")
        r = float(np.linalg.norm(xi))
        value, err = 0.0, 0.0
        if self.gaussian is not None:
            value += 0.5 * float(xi @ self._gaussian_matrix() @ xi)
        if self.order is not None and r > 0:
            log_j, rel = self._jump_log(r)
            jump = math.exp(log_j)
            value += jump
            err += rel * jump
        return value, err

    def _jump_log(self, r: float) -> tuple[float, float]:
        integral, abs_err, alpha_ref = self._jump_radial(r)
        log_j = math.log(self.scale * sphere_area(self.dimension)) + alpha_ref * math.log(r) + math.log(integral)
        return log_j, abs_err / integral

    def __call__(self, xi) -> float:
        return self.evaluate(xi)[0]

    def radial_values(self, radii) -> np.ndarray:
        """``phi`` at points of norm ``radii`` (any direction, by symmetry)."""
        radii = np.abs(np.asarray(radii, dtype=float))
        out = np.empty_like(radii)
        unique, inverse = np.unique(radii, return_inverse=True)
        vals = np.array([self(np.r_[u, np.zeros(self.dimension - 1)]) for u in unique])
        out[...] = vals[inverse].reshape(radii.shape)
        return out

    def log_value(self, r: float) -> float:
        """``log phi`` at a point of norm ``r > 0``, usable where ``phi`` underflows."""
        if r <= 0:
            raise ValueError("log_value needs r > 0")
        parts = []
        if self.gaussian is not None:
            s = self._gaussian_matrix()
            quad = 0.5 * float(s[0, 0])
            if quad > 0:
                parts.append(math.log(quad) + 2.0 * math.log(r))
        if self.order is not None:
            parts.append(self._jump_log(r)[0])
        return float(np.logaddexp.reduce(parts))

    def log_value_at_log(self, log_r: float) -> float:
        """``log phi(exp(log_r))`` for ``log_r`` far outside float range of ``r``."""
        parts = []
        if self.gaussian is not None:
            quad = 0.5 * float(self._gaussian_matrix()[0, 0])
            if quad > 0:
                parts.append(math.log(quad) + 2.0 * log_r)
        if self.order is not None:
            key = ("log", float(log_r))
            hit = self._cache.get(key)
            if hit is None:
                hit = _scaled_jump_integral(self.order, self.dimension, float(log_r), self.profile)
                self._cache[key] = hit
            integral, _, alpha_ref = hit
            parts.append(math.log(self.scale * sphere_area(self.dimension)) + alpha_ref * log_r
                         + math.log(integral))
        if not parts:
            return -math.inf
        return float(np.logaddexp.reduce(parts))

    def table(self, xis, path) -> None:
        """Write ``xi, phi(xi), error_bound`` rows to a CSV file (one-dimensional xi)."""
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["xi", "phi", "error_bound"])
            for x in xis:
                point = np.r_[x, np.zeros(self.dimension - 1)]
                val, err = self.evaluate(point)
                writer.writerow([repr(float(x)), repr(val), repr(err)])


def _scaled_jump_integral(order: OrderFunction, d: int, log_r: float, prof: QuadratureProfile):
    """Return ``(I, abs_err, alpha_ref)`` with ``jump = kappa S_d r^alpha_ref I``."""
    big_l = -log_r
    a_ref = float(order.at_log(big_l))
    n = prof.nodes
    n_low = max(n - 8, 4)

    def log_w(log_t):
        a_t = order.at_log(log_t + big_l)
        return -(1.0 + a_t) * log_t - (a_t - a_ref) * big_l

    def panels(edges, f):
        t, wt = _panel_nodes(edges, n)
        hi = np.sum(f(t) * wt, axis=1)
        t2, wt2 = _panel_nodes(edges, n_low)
        lo = np.sum(f(t2) * wt2, axis=1)
        return hi, np.abs(hi - lo)

    nu = d / 2 - 1
    big_t = (2 * prof.periods + 0.75 + nu / 2) * math.pi

    # middle: [pi, T]
    m = max(2, int(round((big_t - math.pi) / (0.5 * math.pi))))
    mid, mid_err = panels(np.linspace(math.pi, big_t, m + 1),
                          lambda t: _angular_one_minus_cos(t, d) * np.exp(log_w(np.log(t))))
    total = float(mid.sum())
    err = float(mid_err.sum())

    # oscillatory tail: int_T^inf Lambda_d(t) w(t) dt, half-period pieces
    edges = big_t + math.pi * np.arange(prof.tail_terms + 1)
    pieces, piece_err = panels(edges, lambda t: _angular_cos(t, d) * np.exp(log_w(np.log(t))))
    sums = np.cumsum(pieces)
    prev = sums
    while len(sums) > 1:
        prev = sums
        sums = 0.5 * (sums[:-1] + sums[1:])
    osc = float(sums[0])
    osc_err = abs(osc - float(prev[-1])) + float(piece_err.sum())

    # non-oscillatory tail: int_T^inf w(t) dt, panels in v = log(t / T)
    used = m + prof.tail_terms
    far, far_err, used = _log_panels_outward(math.log(big_t), log_w, order, big_l, a_ref, n, n_low,
                                             prof, abs(total) + 1e-300, used)
    total += far - osc
    err += far_err + osc_err

    # near zero: (0, pi] on panels in v = log(pi / t)
    near, near_err, used = _log_panels_inward(math.log(math.pi), log_w, order, big_l, a_ref, d, n, n_low,
                                              prof, abs(total), used)
    total += near
    err += near_err
    if not total > 0 or err > prof.rtol * total:
        raise QuadratureError("exponent quadrature did not converge", total, err)
    return total, err, a_ref


def _log_panels_outward(log_start, log_w, order, big_l, a_ref, n, n_low, prof, scale, used):
    """``int_{exp(log_start)}^inf w(t) dt`` with an analytic frozen-order remainder."""
    acc, acc_err = 0.0, 0.0
    v0 = 0.0
    chunk = 16
    while True:
        edges = log_start + v0 + np.arange(chunk + 1, dtype=float)
        x, wt = _panel_nodes(edges, n)
        hi = np.sum(np.exp(log_w(x) + x) * wt)
        x2, wt2 = _panel_nodes(edges, n_low)
        lo = np.sum(np.exp(log_w(x2) + x2) * wt2)
        acc += hi
        acc_err += abs(hi - lo)
        used += chunk
        v0 += chunk
        log_end = log_start + v0
        a_e = float(order.at_log(log_end + big_l))
        rem = math.exp(-(a_e - a_ref) * big_l - a_e * log_end) / a_e
        if rem < 1e-3 * prof.rtol * (scale + acc):
            return acc + rem, acc_err + 1e-2 * rem, used
        if used > prof.max_panels:
            raise QuadratureError("outer tail exceeded panel budget", acc + rem, rem)


def _log_panels_inward(log_start, log_w, order, big_l, a_ref, d, n, n_low, prof, scale, used):
    """``int_0^{exp(log_start)} K_d(t) w(t) dt`` with a small-t remainder."""
    acc, acc_err = 0.0, 0.0
    v0 = 0.0
    chunk = 16

    def f(x):
        return np.exp(_log_angular_one_minus_cos(x, d) + log_w(x) + x)

    while True:
        edges = log_start - v0 - np.arange(chunk + 1, dtype=float)
        x, wt = _panel_nodes(edges[::-1], n)
        hi = np.sum(f(x) * wt)
        x2, wt2 = _panel_nodes(edges[::-1], n_low)
        lo = np.sum(f(x2) * wt2)
        acc += hi
        acc_err += abs(hi - lo)
        used += chunk
        v0 += chunk
        log_end = log_start - v0
        a_e = float(order.at_log(log_end + big_l))
        if a_e >= 2.0:
            raise QuadratureError("order reaches 2 near the origin", acc, math.inf)
        rem = math.exp(-(a_e - a_ref) * big_l + (2.0 - a_e) * log_end) / (2 * d * (2.0 - a_e))
        if rem < 1e-3 * prof.rtol * (scale + acc):
            return acc + rem, acc_err + 1e-2 * rem, used
        if used > prof.max_panels:
            raise QuadratureError("small-jump region exceeded panel budget", acc + rem, rem)


def radial_moment(order: OrderFunction, a: float, b: float, power: float,
                  weight: Callable | None = None, nodes: int = 24, rtol: float = 1e-12) -> float:
    """``int_a^b r^(power - 1 - alpha(r)) weight(r) dr`` with ``0 <= a < b <= inf``.

    Endpoints at 0 or infinity get an analytic remainder with the order (and
    weight) frozen at the last panel edge; the integrand exponent must make
    that end integrable.
    """
    if not 0 <= a < b:
        raise ValueError("need 0 <= a < b")
    wfun = weight if weight is not None else (lambda r: np.ones_like(r))

    def integrand(x):
        r = np.exp(x)
        return np.exp((power - order.at_log(x)) * x) * wfun(r)

    lo_log = math.log(a) if a > 0 else None
    hi_log = math.log(b) if math.isfinite(b) else None
    if lo_log is not None and hi_log is not None:
        m = max(1, int(math.ceil(hi_log - lo_log)))
        x, wt = _panel_nodes(np.linspace(lo_log, hi_log, m + 1), nodes)
        return float(np.sum(integrand(x) * wt))

    total = 0.0
    if lo_log is None and hi_log is None:
        return radial_moment(order, 0.0, 1.0, power, weight, nodes, rtol) + \
            radial_moment(order, 1.0, math.inf, power, weight, nodes, rtol)
    step = -1.0 if lo_log is None else 1.0
    start = hi_log if lo_log is None else lo_log
    for k in range(0, 4000, 16):
        edges = start + step * np.arange(k, k + 17, dtype=float)
        x, wt = _panel_nodes(np.sort(edges), nodes)
        total += float(np.sum(integrand(x) * wt))
        end = start + step * (k + 16)
        expo = power - float(order.at_log(end))
        if step < 0 and expo <= 0:
            raise ValueError("integrand is not integrable at 0")
        if step > 0 and expo >= 0:
            raise ValueError("integrand is not integrable at infinity")
        rem = float(wfun(np.array([math.exp(end)]))[0]) * math.exp(expo * end) / abs(expo)
        if rem < rtol * abs(total):
            return total + rem
    raise QuadratureError("radial moment did not converge", total, math.inf)


def levy_integrability(order: OrderFunction, dimension: int = 1) -> float:
    """``int min(1, |h|^2) |h|^(-d-alpha(|h|)) dh`` over R^d; finite for valid orders."""
    inner = radial_moment(order, 0.0, 1.0, power=2.0)
    outer = radial_moment(order, 1.0, math.inf, power=0.0)
    return sphere_area(dimension) * (inner + outer)


def eval_exponent(e: LevyExponent, xi) -> float:
    """``phi(xi)``; ``phi(0) = 0`` exactly."""
    return e(xi)


def stable_scaling_check(e: LevyExponent, xi, c: float) -> float:
    """Relative deviation ``|phi(c xi) - c^alpha phi(xi)| / phi(c xi)`` for constant order."""
    if e.order is None or e.order.kind != "constant" or e.gaussian is not None:
        raise ValueError("scaling check needs a constant order and no Gaussian part")
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    if not np.any(xi):
        raise ValueError("scaling check excludes xi = 0")
    if not c > 0:
        raise ValueError("c must be positive")
    big = e(c * xi)
    if big == 0:
        raise QuadratureError("phi(c xi) vanished away from the origin", big, math.inf)
    return abs(big - c**e.order.alpha * e(xi)) / big


def lower_bound_shape(xi: float, eps: float) -> float:
    """``|xi|^(1 - log(pi/|xi| + e^2)^(-eps))``."""
    ax = abs(xi)
    return ax ** (1.0 - math.log(math.pi / ax + math.exp(2.0)) ** (-eps))


@dataclass(frozen=True)
class LowerBoundCheck:
    phi: float
    bound: float
    ok: bool
    constant: float


def proof_constant() -> float:
    """``(2/pi) int_{pi/2}^{pi} (1 - cos u) / u du``.

    Restricting the exponent integral to jumps ``h`` in ``[pi/(2|xi|), pi/|xi|]``
    and using that ``h^alpha(h)`` increases there gives
    ``phi(xi) >= 2 (pi/|xi|)^(-alpha(pi/|xi|)) int_{pi/2}^{pi} (1 - cos u)/u du``,
    and ``pi^(-alpha) >= 1/pi``. Valid for ``0 < |xi| <= pi/2``.
    """
    _, ci_hi = special.sici(math.pi)
    _, ci_lo = special.sici(0.5 * math.pi)
    return 2.0 / math.pi * (math.log(2.0) - (ci_hi - ci_lo))


def exponent_lower_bound_check(e: LevyExponent, xi: float, calibration: str = "proof",
                               xi0: float = 0.5) -> LowerBoundCheck:
    """Check ``phi(xi) >= c |xi|^(1 - log(pi/|xi| + e^2)^(-eps))`` for the sharp-log family.

    ``calibration="proof"`` uses the explicit constant of :func:`proof_constant`;
    ``"point"`` makes the bound tight at ``xi0`` instead, which is stricter
    than the inequality warrants because ``phi`` divided by the shape keeps
    falling as ``xi -> 0``.
    """
    if e.dimension != 1 or e.order is None or e.order.kind != "sharp_log" or e.order.params[1] != 1.0:
        raise ValueError("lower-bound check needs the d = 1 family 1 - log(u+e^2)^(-eps)")
    if not 0 < abs(xi) < 1:
        raise ValueError("lower-bound check needs 0 < |xi| < 1")
    eps = e.order.params[0]
    if calibration == "proof":
        const = proof_constant()
    elif calibration == "point":
        const = e(xi0) / lower_bound_shape(xi0, eps)
    else:
        raise ValueError(f"unknown calibration {calibration!r}")
    val = e(xi)
    bound = const * lower_bound_shape(xi, eps)
    return LowerBoundCheck(float(val), float(bound), bool(val >= bound * (1 - 1e-12)), float(const))
