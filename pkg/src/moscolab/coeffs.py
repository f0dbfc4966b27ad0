"""Coefficient families: diffusion matrices, variable orders and jump kernels.

Also hosts the L1-local distance used to check that a coefficient sequence
converges to its limit on compacts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .constants import CHECK_RTOL, E2, ORDER_SAMPLE_MAX, ORDER_SAMPLES


class CoefficientError(ValueError):
    """Raised when a coefficient family is built with invalid parameters."""


def _log_shift_e2(log_u):
    """Return log(u + e^2) given log(u), without overflow."""
    return np.logaddexp(log_u, 2.0)


@dataclass(frozen=True)
class OrderFunction:
    """Radial variable order ``alpha(u)`` with ``0 < lower <= alpha <= upper <= 2``.

    ``kind`` is one of ``"constant"``, ``"sharp_log"`` or ``"param"``. The
    sharp-log kind is ``offset - log(u + e^2)^(-eps)``. ``upper`` is a
    supremum: a sharp-log order with ``offset == 2`` never reaches 2.
    """

    kind: str
    params: tuple
    lower: float
    upper: float
    func: Callable | None = field(default=None, compare=False, repr=False)

    @classmethod
    def constant(cls, alpha: float) -> "OrderFunction":
        if not 0.0 < alpha < 2.0:
            raise CoefficientError(f"constant order must lie in (0, 2), got {alpha}")
        return cls("constant", (float(alpha),), float(alpha), float(alpha))

    @classmethod
    def param(cls, name: str, func: Callable, params: Sequence[float] = ()) -> "OrderFunction":
        """Wrap an arbitrary vectorised order ``func(u, *params)``.

        Bounds are found by sampling and must fall inside (0, 2).
        """
        u = _order_sample_points()
        vals = np.asarray(func(u, *params), dtype=float)
        if not np.all(np.isfinite(vals)):
            raise CoefficientError(f"order {name!r} is not finite on [0, {ORDER_SAMPLE_MAX:g}]")
        lo, hi = float(vals.min()), float(vals.max())
        if not (0.0 < lo and hi < 2.0):
            raise CoefficientError(f"order {name!r} has range [{lo}, {hi}] outside (0, 2)")
        return cls("param", (name, *map(float, params)), lo, hi, func)

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        if self.kind == "constant":
            return np.full_like(u, self.params[0])
        if self.kind == "sharp_log":
            eps, offset = self.params
            return offset - np.log(u + E2) ** (-eps)
        return np.asarray(self.func(u, *self.params[1:]), dtype=float)

    def at_log(self, log_u):
        """Evaluate ``alpha(exp(log_u))`` without forming ``exp(log_u)``."""
        log_u = np.asarray(log_u, dtype=float)
        if self.kind == "constant":
            return np.full_like(log_u, self.params[0])
        if self.kind == "sharp_log":
            eps, offset = self.params
            return offset - _log_shift_e2(log_u) ** (-eps)
        return self(np.exp(np.minimum(log_u, 700.0)))

    @property
    def alpha(self) -> float:
        if self.kind != "constant":
            raise AttributeError("only constant orders have a single alpha")
        return self.params[0]

    def describe(self) -> str:
        if self.kind == "constant":
            return f"const({self.params[0]:g})"
        if self.kind == "sharp_log":
            eps, offset = self.params
            return f"{offset:g}-log(u+e^2)^-{eps:g}"
        return f"{self.params[0]}{tuple(self.params[1:])}"

    def check_bounds(self, samples: int = ORDER_SAMPLES) -> bool:
        """Sample on a log-spaced grid of ``[0, 1e12]`` and check the bounds."""
        vals = self(_order_sample_points(samples))
        slack = CHECK_RTOL * max(abs(self.upper), 1.0)
        return bool(np.all(vals >= self.lower - slack) and np.all(vals <= self.upper + slack))


def _order_sample_points(samples: int = ORDER_SAMPLES) -> np.ndarray:
    return np.concatenate([[0.0], np.logspace(-12, math.log10(ORDER_SAMPLE_MAX), samples - 1)])


def make_sharp_log_order(eps: float, offset: float = 1.0, cap: float = 2.0) -> OrderFunction:
    """Build ``alpha(u) = offset - log(u + e^2)^(-eps)``.

    The map is increasing in ``u``, so ``alpha(0) = offset - 2^(-eps)`` is the
    infimum and ``offset`` the supremum. ``cap`` only bounds the admissible
    offset; families are rejected, never clamped.
    """
    if not eps > 0:
        raise CoefficientError(f"eps must be positive, got {eps}")
    if cap > 2.0:
        raise CoefficientError("cap cannot exceed 2")
    lower = offset - 2.0 ** (-eps)
    if lower <= 0:
        raise CoefficientError(f"alpha(0) = {lower:g} must be positive")
    # the supremum is not attained, so offset == cap is admissible
    if offset > cap:
        raise CoefficientError(f"offset {offset:g} exceeds {cap:g}")
    return OrderFunction("sharp_log", (float(eps), float(offset)), lower, float(offset))


@dataclass(frozen=True)
class DiffusionCoefficient:
    """Symmetric diffusion matrix field ``A(x)`` on R^d.

    ``func`` maps an array of points (shape ``(m,)`` in one dimension,
    ``(m, d)`` otherwise) to values of shape ``(m,)`` when ``d == 1`` or
    ``(m, d, d)``.
    """

    dimension: int
    func: Callable = field(compare=False, repr=False)
    name: str = "custom"

    def __call__(self, x):
        return np.asarray(self.func(np.asarray(x, dtype=float)), dtype=float)

    def matrices(self, x) -> np.ndarray:
        vals = self(x)
        if self.dimension == 1:
            return vals.reshape(-1, 1, 1)
        return vals

    def local_ellipticity(self, radius: float, samples: int = 2001) -> float:
        """Largest ``lam`` with ``lam |xi|^2 <= <A xi, xi> <= |xi|^2 / lam`` on ``|x| <= radius``.

        Uses the extreme eigenvalues at sampled points of the ball (a cube
        of side ``2 * radius`` is sampled and trimmed to the ball).
        """
        pts = _ball_samples(self.dimension, radius, samples)
        eig = np.linalg.eigvalsh(self.matrices(pts))
        lo, hi = float(eig.min()), float(eig.max())
        if lo <= 0:
            return 0.0
        return min(lo, 1.0 / hi)

    def is_symmetric(self, x) -> bool:
        m = self.matrices(x)
        return bool(np.allclose(m, np.swapaxes(m, -1, -2)))


def _ball_samples(d: int, radius: float, samples: int) -> np.ndarray:
    if d == 1:
        return np.linspace(-radius, radius, samples)
    per_axis = max(3, int(round(samples ** (1.0 / d))))
    axes = [np.linspace(-radius, radius, per_axis)] * d
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    return pts[np.linalg.norm(pts, axis=1) <= radius]


PROP15_VARIANTS = ("explosive_family", "conservative_limit", "conservative_family", "explosive_limit")


def make_prop15_coefficient(variant: str, n: int | None = None) -> DiffusionCoefficient:
    """Scalar coefficients ``(2+|x|)^p (log(2+|x|))^q`` of the Feller-type examples.

    ``explosive_family``/``conservative_limit`` belong to case (i),
    ``conservative_family``/``explosive_limit`` to case (ii).
    """
    if variant not in PROP15_VARIANTS:
        raise CoefficientError(f"unknown variant {variant!r}; expected one of {PROP15_VARIANTS}")
    if variant.endswith("family"):
        if n is None or int(n) != n or n < 1:
            raise CoefficientError(f"family variants need an integer n >= 1, got {n}")
        n = int(n)
    powers = {
        "explosive_family": (2.0, 1.0 + 1.0 / n if n else None),
        "conservative_limit": (2.0, 1.0),
        "conservative_family": (2.0 - 1.0 / n if n else None, 2.0),
        "explosive_limit": (2.0, 2.0),
    }
    p, q = powers[variant]

    def a(x, p=p, q=q):
        r = 2.0 + np.abs(x)
        return r**p * np.log(r) ** q

    label = f"{variant}({n})" if variant.endswith("family") else variant
    return DiffusionCoefficient(1, a, name=label)


def constant_diffusion(value: float = 1.0) -> DiffusionCoefficient:
    return DiffusionCoefficient(1, lambda x: np.full_like(x, value, dtype=float), name=f"const({value:g})")


def sine_perturbed_diffusion(n: int, base: float = 1.0) -> DiffusionCoefficient:
    """``a_n(x) = base * (1 + sin(x) / n)``, converging uniformly to ``base``."""
    if n < 2:
        # n = 1 touches zero at x = -pi/2
        raise CoefficientError("sine perturbation needs n >= 2 to stay elliptic")
    return DiffusionCoefficient(1, lambda x: base * (1.0 + np.sin(x) / n), name=f"sine({n})")


@dataclass(frozen=True)
class JumpKernel:
    """Symmetrised stable-like kernel ``0.5 (c(x) + c(y) + 2) |x-y|^(-d-alpha(|x-y|))``.

    ``amplitude`` is the function ``c``; ``c_bounds`` its range ``(c, C)``.
    """

    order: OrderFunction
    amplitude: Callable = field(compare=False, repr=False)
    c_bounds: tuple[float, float] = (0.0, 0.0)
    dimension: int = 1
    name: str = "jump"

    def radial(self, r):
        """``r^(-d-alpha(r))`` for ``r > 0``."""
        r = np.asarray(r, dtype=float)
        logr = np.log(r)
        return np.exp(-(self.dimension + self.order.at_log(logr)) * logr)

    def pair_amplitude(self, x, y):
        return 0.5 * (self.amplitude(x) + self.amplitude(y)) + 1.0

    def density(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        r = _distance(x, y, self.dimension)
        if np.any(r == 0):
            raise CoefficientError("jump kernel is undefined on the diagonal")
        return self.pair_amplitude(x, y) * self.radial(r)

    def dominator(self, x, y):
        """``(1 + C) max(r^(-d-lower), r^(-d-upper))``, valid for any order in range."""
        r = _distance(np.asarray(x, dtype=float), np.asarray(y, dtype=float), self.dimension)
        d = self.dimension
        return (1.0 + self.c_bounds[1]) * np.maximum(r ** (-d - self.order.lower), r ** (-d - self.order.upper))

    def locality_integral(self, x: float, radius: float = 1.0) -> float:
        """``int_{|w|<1} |w|^2 J(x,x+w) dw + int_{|w|>=1} J(x,x+w) dw`` in one dimension."""
        from .levy import radial_moment

        if self.dimension != 1:
            raise NotImplementedError("locality integral is implemented for d = 1")
        total = 0.0
        for sign in (1.0, -1.0):
            amp = lambda w, s=sign: self.pair_amplitude(x, x + s * w)
            total += radial_moment(self.order, 0.0, radius, power=2.0, weight=amp)
            total += radial_moment(self.order, radius, np.inf, power=0.0, weight=amp)
        return total


def _distance(x, y, d):
    if d == 1:
        return np.abs(x - y)
    return np.linalg.norm(x - y, axis=-1)


def make_prop18_kernel(order: OrderFunction, amplitude: Callable | None = None,
                       c_bounds: tuple[float, float] | None = None) -> JumpKernel:
    """Jump kernel with amplitude ``c(x)``; defaults to ``c(x) = (1 + sin x) / 2``.

    The default amplitude has range ``[0, 1]``; the strict lower bound
    ``c > 0`` is met by shifting when callers need it.
    """
    if amplitude is None:
        amplitude = lambda x: 0.5 * (1.0 + np.sin(x))
        c_bounds = (0.0, 1.0)
    if c_bounds is None:
        raise CoefficientError("custom amplitudes need explicit c_bounds")
    return JumpKernel(order, amplitude, tuple(map(float, c_bounds)), 1, name=f"prop18[{order.describe()}]")


def zero_amplitude(x):
    return np.zeros_like(np.asarray(x, dtype=float))


# --- L1-local distances ----------------------------------------------------


def _box_midpoints(region, resolution):
    region = np.atleast_2d(np.asarray(region, dtype=float))
    axes = []
    cell = 1.0
    for lo, hi in region:
        if not hi > lo:
            raise ValueError(f"degenerate box side [{lo}, {hi}]")
        step = (hi - lo) / resolution
        axes.append(lo + (np.arange(resolution) + 0.5) * step)
        cell *= step
    if len(axes) == 1:
        return axes[0], cell
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(axes))
    return pts, cell


def l1_local_distance(f: Callable, g: Callable, region, resolution: int = 512) -> float:
    """Midpoint-rule approximation of ``int_region |f - g|``.

    ``region`` is a list of ``(lo, hi)`` sides. Matrix-valued fields (values
    of shape ``(m, d, d)``) use the Frobenius norm of the difference.
    """
    if resolution < 2:
        raise ValueError("resolution must be at least 2 points per axis")
    pts, cell = _box_midpoints(region, resolution)
    diff = np.asarray(f(pts), dtype=float) - np.asarray(g(pts), dtype=float)
    if diff.ndim == 3:
        norms = np.sqrt(np.sum(diff**2, axis=(1, 2)))
    else:
        norms = np.abs(diff.reshape(len(pts), -1)).max(axis=1) if diff.ndim > 1 else np.abs(diff)
    bad = ~np.isfinite(norms)
    if np.any(bad):
        at = pts[np.argmax(bad)]
        raise ValueError(f"non-finite field value at {at}")
    return float(norms.sum() * cell)


@dataclass(frozen=True)
class AssumptionTrend:
    indices: tuple
    distances: tuple
    flag: str

    @property
    def vanishing(self) -> bool:
        return self.flag == "vanishing"


def check_assumption_sequence(member: Callable[[int], Callable], limit: Callable, region,
                              indices: Sequence[int], resolution: int = 512,
                              atol: float = 1e-10) -> AssumptionTrend:
    """Distances ``int_region |f_n - f|`` along ``indices`` and a trend flag.

    The flag is ``"vanishing"`` when the last distance is below ``atol`` or
    the tail is strictly decreasing and has at least halved since the first
    index; ``"stalled"`` otherwise.
    """
    indices = list(indices)
    if any(b <= a for a, b in zip(indices, indices[1:])):
        raise ValueError("indices must be strictly increasing")
    dists = [l1_local_distance(member(n), limit, region, resolution) for n in indices]
    tail = dists[-3:] if len(dists) >= 3 else dists
    decreasing = all(b < a for a, b in zip(tail, tail[1:]))
    if dists[-1] <= atol:
        flag = "vanishing"
    elif len(dists) > 1 and decreasing and dists[-1] <= 0.5 * dists[0]:
        flag = "vanishing"
    else:
        flag = "stalled"
    return AssumptionTrend(tuple(indices), tuple(dists), flag)
