"""Grid discretisations of diffusion, jump and Fourier-multiplier forms in 1-D.

Every :class:`GridForm` stores the operator ``M`` acting on nodal values, so
the discrete energy is ``E_h(u, u) = h * u @ M @ u`` and the resolvent solves
``(lam + M) u = f``. The three storage layouts are a sparse matrix
(diffusion), a dense matrix (jump) and a symbol sampled on the discrete
frequencies (multiplier).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import scipy.sparse as sp

from .coeffs import DiffusionCoefficient, JumpKernel
from .constants import JUMP_DROP
from .levy import LevyExponent, radial_moment

KILLING = "killing"
PERIODIC = "periodic"


class GridError(ValueError):
    pass


@dataclass(frozen=True)
class Grid1D:
    """Cell-centred grid ``x_i = -L + (i + 1/2) h`` on ``(-L, L)`` with ``h = 2L/N``."""

    half_width: float
    points: int
    boundary: str = PERIODIC

    def __post_init__(self):
        if not self.half_width > 0:
            raise GridError("half_width must be positive")
        if self.points < 16:
            raise GridError("a grid needs at least 16 points")
        if self.boundary not in (KILLING, PERIODIC):
            raise GridError(f"unknown boundary {self.boundary!r}")

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / self.points

    @property
    def nodes(self) -> np.ndarray:
        return -self.half_width + (np.arange(self.points) + 0.5) * self.spacing

    @property
    def frequencies(self) -> np.ndarray:
        """``pi k / L`` for ``k = -N/2 .. N/2 - 1`` in FFT order."""
        k = np.fft.fftfreq(self.points, d=1.0 / self.points)
        return math.pi * k / self.half_width

    def norm(self, u) -> float:
        """h-weighted 2-norm."""
        return float(math.sqrt(self.spacing) * np.linalg.norm(u))

    def with_boundary(self, boundary: str) -> "Grid1D":
        return Grid1D(self.half_width, self.points, boundary)


@dataclass(frozen=True, eq=False)
class GridForm:
    grid: Grid1D
    family: str
    source: Any
    operator: Any = field(repr=False)
    label: str = ""

    def matvec(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if self.family == "multiplier":
            return np.real(np.fft.ifft(self.operator * np.fft.fft(u)))
        return self.operator @ u

    def diagonal(self) -> np.ndarray:
        if self.family == "multiplier":
            return np.full(self.grid.points, float(np.mean(self.operator)))
        if sp.issparse(self.operator):
            return self.operator.diagonal()
        return np.diag(self.operator).copy()

    def to_dense(self) -> np.ndarray:
        if self.family == "multiplier":
            col = np.real(np.fft.ifft(self.operator))
            n = self.grid.points
            idx = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
            return col[idx]
        if sp.issparse(self.operator):
            return self.operator.toarray()
        return np.array(self.operator)

    @property
    def energy_matrix(self) -> np.ndarray:
        """``h * M``: the matrix whose quadratic form is the discrete energy."""
        return self.grid.spacing * self.to_dense()

    @property
    def has_gaussian_part(self) -> bool:
        return self.family == "multiplier" and getattr(self.source, "gaussian", None) is not None

    def export_coo(self, path) -> None:
        """Write the energy matrix as ``row col value`` lines (nonzeros only)."""
        m = sp.coo_matrix(self.energy_matrix)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("row col value\n")
            for i, j, v in zip(m.row, m.col, m.data):
                fh.write(f"{int(i)} {int(j)} {float(v)!r}\n")


def energy(form: GridForm, u) -> float:
    """``E_h(u, u) = h * u @ M @ u``."""
    u = np.asarray(u, dtype=float)
    if u.shape != (form.grid.points,):
        raise GridError(f"vector of shape {u.shape} does not match a grid of {form.grid.points} points")
    return float(form.grid.spacing * (u @ form.matvec(u)))


def _flux_operator(coef_mid: np.ndarray, grid: Grid1D) -> sp.csr_matrix:
    """``D^T diag(coef) D / h^2`` for the link-difference matrix ``D``."""
    n, h = grid.points, grid.spacing
    if grid.boundary == PERIODIC:
        # link i joins node i and node i+1 (mod n)
        rows = np.repeat(np.arange(n), 2)
        cols = np.column_stack([np.arange(n), (np.arange(n) + 1) % n]).ravel()
        vals = np.tile([-1.0, 1.0], n)
        d = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    else:
        # n + 1 links; the outer two end at the window faces, half a cell from
        # the first and last node, where the function vanishes
        coef_mid = np.array(coef_mid, dtype=float)
        coef_mid[[0, -1]] *= 2.0
        rows = np.concatenate([[0], np.repeat(np.arange(1, n), 2), [n]])
        cols = np.concatenate([[0], np.column_stack([np.arange(n - 1), np.arange(1, n)]).ravel(), [n - 1]])
        vals = np.concatenate([[1.0], np.tile([-1.0, 1.0], n - 1), [-1.0]])
        d = sp.csr_matrix((vals, (rows, cols)), shape=(n + 1, n))
    return (d.T @ sp.diags(coef_mid) @ d / h**2).tocsr()


def _link_midpoints(grid: Grid1D) -> np.ndarray:
    x, h = grid.nodes, grid.spacing
    if grid.boundary == PERIODIC:
        return x + 0.5 * h
    return np.concatenate([[-grid.half_width], x[:-1] + 0.5 * h, [grid.half_width]])


def assemble_diffusion(a: DiffusionCoefficient, grid: Grid1D) -> GridForm:
    """Flux-form scheme ``(Mu)_i = -[a_{i+1/2}(u_{i+1}-u_i) - a_{i-1/2}(u_i-u_{i-1})] / h^2``."""
    if a.dimension != 1:
        raise GridError("grid forms are one-dimensional")
    mid = _link_midpoints(grid)
    coef = a(mid)
    if not np.all(coef > 0):
        bad = mid[np.argmax(~(coef > 0))]
        raise GridError(f"diffusion coefficient is not positive at x = {bad}")
    return GridForm(grid, "diffusion", a, _flux_operator(coef, grid), a.name)


def _periodised_radial(kernel: JumpKernel, grid: Grid1D, images: int = 200) -> np.ndarray:
    """``sum_k rho(|m h + 2 L k|)`` for offsets ``m = 0..N-1`` (``m = 0`` skips ``k = 0``)."""
    n, h, period = grid.points, grid.spacing, 2.0 * grid.half_width
    m = np.arange(n) * h
    k = np.arange(-images, images + 1)
    r = np.abs(m[:, None] + period * k[None, :])
    with np.errstate(divide="ignore"):
        vals = np.where(r > 0, kernel.radial(np.where(r > 0, r, 1.0)), 0.0)
    out = vals.sum(axis=1)
    # images beyond |k| = images, with the order frozen at the cut
    cut = period * (images + 0.5)
    a_cut = float(kernel.order(cut))
    tail = cut ** (-a_cut) / (a_cut * period)
    out = out + 2.0 * tail
    # offsets m and N - m sum the same images in a different order; average them
    # so the assembled matrix is symmetric to the last bit
    return 0.5 * (out + out[(-np.arange(n)) % n])


def _subgrid_coefficients(kernel: JumpKernel, grid: Grid1D) -> np.ndarray:
    """``kappa_i = 1/2 int_{|w| < h/2} w^2 J(x_i, x_i + w) dw`` at every node."""
    moment = radial_moment(kernel.order, 0.0, 0.5 * grid.spacing, power=2.0)
    return (kernel.amplitude(grid.nodes) + 1.0) * moment


def _killing_rates(kernel: JumpKernel, grid: Grid1D) -> np.ndarray:
    """``int_{|y| > L} J(x_i, y) dy`` for every node."""
    out = np.empty(grid.points)
    big_l = grid.half_width
    for i, x in enumerate(grid.nodes):
        right = radial_moment(kernel.order, big_l - x, math.inf, power=0.0,
                              weight=lambda w, x=x: kernel.pair_amplitude(x, x + w))
        left = radial_moment(kernel.order, big_l + x, math.inf, power=0.0,
                             weight=lambda w, x=x: kernel.pair_amplitude(x, x - w))
        out[i] = right + left
    return out


def assemble_jump(kernel: JumpKernel, grid: Grid1D) -> GridForm:
    """Dense jump operator with a sub-grid diffusion correction.

    Off-diagonal ``M_ij = -J(x_i, x_j) h`` (periodised on a periodic grid);
    the jumps shorter than ``h/2``, which the pair sum cannot see, enter as a
    flux term with coefficient ``kappa``. On a killing grid the rate of
    jumping out of the window is added to the diagonal.
    """
    if kernel.dimension != 1:
        raise GridError("grid forms are one-dimensional")
    n, h, x = grid.points, grid.spacing, grid.nodes
    idx = np.arange(n)
    amp = kernel.pair_amplitude(x[:, None], x[None, :])
    if grid.boundary == PERIODIC:
        rho = _periodised_radial(kernel, grid)
        radial = rho[(idx[None, :] - idx[:, None]) % n]
    else:
        r = np.abs(x[:, None] - x[None, :])
        np.fill_diagonal(r, 1.0)
        radial = kernel.radial(r)
    off = amp * radial * h
    np.fill_diagonal(off, 0.0)
    if not np.all(np.isfinite(off)):
        i, j = np.argwhere(~np.isfinite(off))[0]
        raise GridError(f"jump kernel is not finite at pair ({x[i]}, {x[j]})")
    off[off < JUMP_DROP * off.max()] = 0.0
    m = -off
    m[idx, idx] = off.sum(axis=1)
    kappa = _subgrid_coefficients(kernel, grid)
    if grid.boundary == PERIODIC:
        kappa_mid = 0.5 * (kappa + np.roll(kappa, -1))
    else:
        kappa_mid = np.concatenate([[kappa[0]], 0.5 * (kappa[:-1] + kappa[1:]), [kappa[-1]]])
        m[idx, idx] += _killing_rates(kernel, grid)
    m += _flux_operator(kappa_mid, grid).toarray()
    return GridForm(grid, "jump", kernel, m, kernel.name)


def assemble_multiplier(e: LevyExponent, grid: Grid1D) -> GridForm:
    """Operator diagonal in the discrete Fourier basis with symbol ``phi(pi k / L)``."""
    if grid.boundary != PERIODIC:
        raise GridError("multiplier forms need a periodic grid")
    if e.dimension != 1:
        raise GridError("grid forms are one-dimensional")
    symbol = e.radial_values(grid.frequencies)
    return GridForm(grid, "multiplier", e, symbol, e.describe())


def symbol_form(symbol: np.ndarray, grid: Grid1D, label: str = "symbol", source: Any = None) -> GridForm:
    """Multiplier form from an explicit symbol array in FFT order."""
    if grid.boundary != PERIODIC:
        raise GridError("multiplier forms need a periodic grid")
    symbol = np.asarray(symbol, dtype=float)
    if symbol.shape != (grid.points,):
        raise GridError("symbol length must equal the number of grid points")
    return GridForm(grid, "multiplier", source, symbol, label)
