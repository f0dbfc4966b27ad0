"""Strong resolvent and semigroup convergence of grid forms.

Mosco convergence of closed forms is equivalent to strong convergence of
their resolvents (and then of their semigroups). On a fixed grid that is
checked directly: solve ``(lam + M_n) u = f`` for every member of a family
and compare with the limit's solution in the h-weighted 2-norm. This is a
finite-dimensional proxy for the statement on L^2(R); reports say so.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .constants import MOSCO_DECREASE, MOSCO_THRESHOLD, NEG_TOL, SOLVE_RTOL
from .forms import Grid1D, GridForm, energy
from .solvers import conjugate_gradient

PROXY_NOTE = ("finite-dimensional proxy: strong resolvent convergence of grid operators "
              "on a truncated window stands in for Mosco convergence on L^2(R)")


@dataclass(frozen=True)
class ResolventSolve:
    lam: float
    f: np.ndarray = field(repr=False)
    u: np.ndarray = field(repr=False)
    residual: float
    iterations: int


def resolvent(form: GridForm, lam: float, f) -> ResolventSolve:
    """Solve ``(lam I + M) u = f``."""
    if not lam > 0:
        raise ValueError("lambda must be positive")
    f = np.asarray(f, dtype=float)
    if f.shape != (form.grid.points,):
        raise ValueError("right-hand side does not match the grid")
    fnorm = np.linalg.norm(f)
    if form.family == "multiplier":
        u = np.real(np.fft.ifft(np.fft.fft(f) / (lam + form.operator)))
        res = np.linalg.norm(lam * u + form.matvec(u) - f)
        return ResolventSolve(lam, f, u, float(res / fnorm) if fnorm else 0.0, 0)
    diag = lam + form.diagonal()
    u, res, its = conjugate_gradient(lambda v: lam * v + form.matvec(v), f, diag=diag, rtol=SOLVE_RTOL)
    return ResolventSolve(lam, f, u, res, its)


def semigroup_apply(form: GridForm, t: float, f, steps: int = 64) -> np.ndarray:
    """Implicit Euler approximation ``(I + (t/m) M)^(-m) f`` of ``P_t f``."""
    if steps < 1:
        raise ValueError("steps must be at least 1")
    if not t > 0:
        raise ValueError("t must be positive")
    f = np.asarray(f, dtype=float)
    tau = t / steps
    if form.family == "multiplier":
        return np.real(np.fft.ifft(np.fft.fft(f) * (1.0 + tau * form.operator) ** (-steps)))
    u = f
    for _ in range(steps):
        # (I + tau M) v = u  <=>  (1/tau + M) v = u / tau
        u = resolvent(form, 1.0 / tau, u / tau).u
    return u


# --- test vectors -------------------------------------------------------------


def gaussian_bump(x):
    return np.exp(-x**2)


def smoothed_indicator(x, width=0.1):
    return 0.5 * (np.tanh((x + 1.0) / width) - np.tanh((x - 1.0) / width))


def taper_bump(x):
    return np.where(np.abs(x) < 2.0, np.cos(0.25 * np.pi * x) ** 2, 0.0)


TEST_VECTORS: dict[str, Callable] = {
    "gauss": gaussian_bump,
    "step": smoothed_indicator,
    "taper": taper_bump,
}


# --- diagnostic ---------------------------------------------------------------


@dataclass(frozen=True)
class MoscoEntry:
    n: int
    lam: float
    t: float
    f_id: str
    energy_err: float
    resolvent_err: float
    semigroup_err: float


@dataclass
class ConvergenceReport:
    scenario: str
    entries: list[MoscoEntry]
    verdict: str
    threshold: float
    window_sensitivity: float | None = None
    note: str = PROXY_NOTE

    def max_resolvent_error(self, n: int) -> float:
        return max(e.resolvent_err for e in self.entries if e.n == n)

    @property
    def indices(self) -> list[int]:
        return sorted({e.n for e in self.entries})

    def write_csv(self, path) -> None:
        """Rows ``scenario, n, lambda, f_id, energy_err, resolvent_err, semigroup_err``."""
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["scenario", "n", "lambda", "f_id", "energy_err", "resolvent_err", "semigroup_err"])
            for e in self.entries:
                writer.writerow([self.scenario, e.n, repr(e.lam), e.f_id, f"{e.energy_err:.12e}",
                                 f"{e.resolvent_err:.12e}", f"{e.semigroup_err:.12e}"])


def _verdict(report_entries, indices, threshold, decrease) -> str:
    first = max(e.resolvent_err for e in report_entries if e.n == indices[0])
    last = max(e.resolvent_err for e in report_entries if e.n == indices[-1])
    if last == 0.0:
        return "ConvergenceObserved"
    if last < threshold and last < decrease * first:
        return "ConvergenceObserved"
    return "Stalled"


def mosco_diagnostic(family: Sequence[tuple[int, GridForm]], limit: GridForm,
                     lambdas: Sequence[float] = (1.0,), f_ids: Sequence[str] = ("gauss",),
                     times: Sequence[float] | None = None, scenario: str = "custom",
                     threshold: float = MOSCO_THRESHOLD, decrease: float = MOSCO_DECREASE,
                     semigroup_steps: int = 32, workers: int = 1) -> ConvergenceReport:
    """Compare each member of ``family`` with ``limit`` on shared test data.

    ``times`` pairs with ``lambdas`` by position (default ``t = 1/lam``).
    The energy error ``|E^n(f,f) - E(f,f)|`` uses the constant recovery
    sequence ``u_n = f``. Resolvent and semigroup errors are h-weighted
    2-norm distances divided by the norm of the limit's output.
    """
    grid = limit.grid
    family = list(family)
    if not family:
        raise ValueError("family is empty")
    for n, form in family:
        if form.grid != grid:
            raise ValueError(f"member n={n} lives on a different grid")
    times = list(times) if times is not None else [1.0 / lam for lam in lambdas]
    if len(times) != len(lambdas):
        raise ValueError("times must pair with lambdas")
    x = grid.nodes
    vectors = {fid: TEST_VECTORS[fid](x) for fid in f_ids}

    ref_energy = {fid: energy(limit, v) for fid, v in vectors.items()}
    ref_res = {(fid, lam): resolvent(limit, lam, v).u for fid, v in vectors.items() for lam in lambdas}
    ref_sg = {(fid, t): semigroup_apply(limit, t, v, semigroup_steps) for fid, v in vectors.items() for t in times}

    def job(item):
        (n, form), fid, (lam, t) = item
        v = vectors[fid]
        e_err = abs(energy(form, v) - ref_energy[fid])
        g_ref = ref_res[(fid, lam)]
        r_err = grid.norm(resolvent(form, lam, v).u - g_ref) / grid.norm(g_ref)
        p_ref = ref_sg[(fid, t)]
        s_err = grid.norm(semigroup_apply(form, t, v, semigroup_steps) - p_ref) / grid.norm(p_ref)
        return MoscoEntry(n, float(lam), float(t), fid, e_err, r_err, s_err)

    items = [(member, fid, pair) for member in family for fid in f_ids for pair in zip(lambdas, times)]
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            entries = list(pool.map(job, items))
    else:
        entries = [job(it) for it in items]
    indices = sorted({n for n, _ in family})
    return ConvergenceReport(scenario, entries, _verdict(entries, indices, threshold, decrease), threshold)


def run_mosco(builder: Callable[[int | None, Grid1D], GridForm], indices: Sequence[int], grid: Grid1D,
              check_window: bool = True, **kwargs) -> ConvergenceReport:
    """Assemble ``builder(n, grid)`` for each index and ``builder(None, grid)`` as the limit.

    With ``check_window`` the largest-index comparison is repeated on a
    window twice as wide (same spacing); the relative change of that error is
    stored as ``window_sensitivity``.
    """
    family = [(n, builder(n, grid)) for n in indices]
    report = mosco_diagnostic(family, builder(None, grid), **kwargs)
    if check_window:
        wide = Grid1D(2 * grid.half_width, 2 * grid.points, grid.boundary)
        n_last = indices[-1]
        lam = kwargs.get("lambdas", (1.0,))[0]
        fid = kwargs.get("f_ids", ("gauss",))[0]
        errs = []
        for g in (grid, wide):
            v = TEST_VECTORS[fid](g.nodes)
            ref = resolvent(builder(None, g), lam, v).u
            errs.append(g.norm(resolvent(builder(n_last, g), lam, v).u - ref) / g.norm(ref))
        report.window_sensitivity = abs(errs[1] - errs[0]) / errs[0] if errs[0] > 0 else 0.0
    return report


def decreasing_trend(report: ConvergenceReport, decrease: float = MOSCO_DECREASE) -> bool:
    """Resolvent errors strictly decrease along ``n`` and end below ``decrease`` times the first.

    A rate-free reading of convergence for short index lists, where the
    absolute threshold of the verdict cannot be reached yet.
    """
    idx = report.indices
    errs = [report.max_resolvent_error(n) for n in idx]
    if len(errs) < 2:
        return False
    if errs[-1] == 0.0:
        return True
    return all(b < a for a, b in zip(errs, errs[1:])) and errs[-1] <= decrease * errs[0]
