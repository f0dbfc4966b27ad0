"""Scenario pipelines: classify each family member and its limit, then check convergence.

A scenario produces a :class:`ScenarioResult`: classification records,
Mosco reports, coefficient-convergence checks and the list of claim checks
whose outcome sets the exit status of a run.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .classify import (CONSERVATIVE, EXPLOSIVE, INDETERMINATE, RECURRENT, TRANSIENT, PathClassification,
                       classical_stable_recurrent, classify_chung_fuchs, classify_recurrence_u04,
                       classify_sharp_epsilon, feller_explosion_test)
from .coeffs import AssumptionTrend, OrderFunction, check_assumption_sequence, make_sharp_log_order
from .families import build_member, get_family
from .forms import KILLING, PERIODIC, Grid1D, assemble_diffusion, assemble_jump, assemble_multiplier
from .levy import LevyExponent
from .mosco import TEST_VECTORS, ConvergenceReport, decreasing_trend, run_mosco

OPPOSITE = {RECURRENT: TRANSIENT, TRANSIENT: RECURRENT, CONSERVATIVE: EXPLOSIVE, EXPLOSIVE: CONSERVATIVE}


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class ScenarioConfig:
    id: str
    n_list: tuple[int, ...] = ()
    eps_list: tuple[float, ...] = ()
    alpha_list: tuple[float, ...] = ()
    grid_n: int = 2048
    grid_l: float = 20.0
    lambdas: tuple[float, ...] = (1.0,)
    times: tuple[float, ...] | None = None
    f_ids: tuple[str, ...] = ("gauss",)
    mosco: bool = True
    semigroup_steps: int = 32
    workers: int = 1

    def validate(self) -> "ScenarioConfig":
        spec = SCENARIOS.get(self.id)
        if spec is None:
            raise ScenarioError(f"unknown scenario {self.id!r}; known: {', '.join(SCENARIOS)}")
        if spec.family is not None:
            fam = get_family(spec.family)
            if not self.n_list:
                raise ScenarioError(f"{self.id}: n list is empty")
            for n in self.n_list:
                if int(n) != n or n < fam.min_index:
                    raise ScenarioError(f"{self.id}: n must be an integer >= {fam.min_index}, got {n}")
            if list(self.n_list) != sorted(set(self.n_list)):
                raise ScenarioError(f"{self.id}: n list must be strictly increasing")
        if self.id == "thm42-sweep":
            if not self.eps_list or any(not e > 0 for e in self.eps_list):
                raise ScenarioError("thm42-sweep: eps values must be positive and at least one is needed")
        if self.id == "const-alpha-sweep":
            if not self.alpha_list or any(not 0 < a < 2 for a in self.alpha_list):
                raise ScenarioError("const-alpha-sweep: alpha values must lie in (0, 2)")
        if self.grid_n < 16:
            raise ScenarioError("grid_n must be at least 16")
        if not self.grid_l > 0:
            raise ScenarioError("grid_l must be positive")
        if not self.lambdas or any(not lam > 0 for lam in self.lambdas):
            raise ScenarioError("lambdas must be positive")
        if self.times is not None:
            if len(self.times) != len(self.lambdas):
                raise ScenarioError("times must have one entry per lambda")
            if any(not t > 0 for t in self.times):
                raise ScenarioError("times must be positive")
        unknown = [f for f in self.f_ids if f not in TEST_VECTORS]
        if unknown or not self.f_ids:
            raise ScenarioError(f"unknown test vectors {unknown}; known: {', '.join(TEST_VECTORS)}")
        if self.semigroup_steps < 1 or self.workers < 1:
            raise ScenarioError("semigroup_steps and workers must be at least 1")
        return self


@dataclass(frozen=True)
class ClaimCheck:
    """One expected-vs-observed comparison; ``passed`` feeds the exit status."""

    label: str
    expected: str
    observed: str
    passed: bool


@dataclass(frozen=True)
class ClassificationRecord:
    param: str
    classification: PathClassification
    claim: str | None = None
    role: str = "primary"  # or "corroboration"

    @property
    def consistent(self) -> bool:
        """Primary rows must match the claim; corroboration rows must not contradict it."""
        if self.claim is None:
            return True
        got = self.classification.property
        if self.role == "primary":
            return got == self.claim
        return got != OPPOSITE.get(self.claim)


@dataclass
class ScenarioResult:
    scenario: str
    classifications: list[ClassificationRecord] = field(default_factory=list)
    reports: list[ConvergenceReport] = field(default_factory=list)
    assumptions: list[tuple[str, AssumptionTrend]] = field(default_factory=list)
    checks: list[ClaimCheck] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def exit_status(self) -> int:
        return 0 if self.passed else 1


@dataclass(frozen=True)
class ScenarioSpec:
    id: str
    description: str
    family: str | None
    defaults: dict
    pipeline: Callable[[ScenarioConfig], ScenarioResult]


def _param(n) -> str:
    return "limit" if n is None else f"n={n}"


def _classification_checks(result: ScenarioResult) -> None:
    """Group records by parameter: a claim passes when some primary method reaches
    it and no record contradicts it."""
    by_param: dict[str, list[ClassificationRecord]] = {}
    for rec in result.classifications:
        if rec.claim is not None:
            by_param.setdefault(rec.param, []).append(rec)
    for param, recs in by_param.items():
        claim = recs[0].claim
        primary = [r for r in recs if r.role == "primary"]
        reached = any(r.classification.property == claim for r in primary)
        contradicted = [r for r in recs if r.classification.property == OPPOSITE.get(claim)]
        observed = ", ".join(f"{r.classification.method}={r.classification.property}" for r in recs)
        result.checks.append(ClaimCheck(f"{param} is {claim}", claim, observed, reached and not contradicted))


def _mosco_check(result: ScenarioResult, report: ConvergenceReport, what: str) -> None:
    errs = ", ".join(f"n={n}: {report.max_resolvent_error(n):.3e}" for n in report.indices)
    trend = decreasing_trend(report)
    result.checks.append(ClaimCheck(f"{what} converge to the limit (resolvent proxy)",
                                    "strictly decreasing errors", f"{errs}; verdict {report.verdict}", trend))


def _grid(cfg: ScenarioConfig, boundary: str) -> Grid1D:
    return Grid1D(cfg.grid_l, cfg.grid_n, boundary)


def _mosco_kwargs(cfg: ScenarioConfig) -> dict:
    return dict(lambdas=cfg.lambdas, f_ids=cfg.f_ids, times=cfg.times, scenario=cfg.id,
                semigroup_steps=cfg.semigroup_steps, workers=cfg.workers)


# --- pipelines -----------------------------------------------------------------


def _feller_pipeline(member_claim: str, limit_claim: str):
    def run(cfg: ScenarioConfig) -> ScenarioResult:
        res = ScenarioResult(cfg.id)
        for n in list(cfg.n_list) + [None]:
            a = build_member(cfg.id, n)
            claim = member_claim if n is not None else limit_claim
            res.classifications.append(ClassificationRecord(_param(n), feller_explosion_test(a), claim))
        _classification_checks(res)
        res.assumptions.append(("coefficients, L1 on [-10, 10]", check_assumption_sequence(
            lambda n: build_member(cfg.id, n), build_member(cfg.id), [(-10.0, 10.0)], cfg.n_list)))
        if cfg.mosco:
            report = run_mosco(lambda n, g: assemble_diffusion(build_member(cfg.id, n), g), cfg.n_list,
                               _grid(cfg, KILLING), **_mosco_kwargs(cfg))
            res.reports.append(report)
            _mosco_check(res, report, "diffusion forms")
        return res
    return run


def _order_records(res, param, order: OrderFunction, claim, eps_family: float | None):
    """Classification rows for one radial order in d = 1."""
    if eps_family is not None:
        res.classifications.append(ClassificationRecord(param, classify_sharp_epsilon(eps_family, False), claim))
    if claim == RECURRENT:
        res.classifications.append(ClassificationRecord(param, classify_recurrence_u04(order), claim,
                                                        "primary" if eps_family is None else "corroboration"))
    cf = classify_chung_fuchs(LevyExponent(1, order))
    role = "primary" if eps_family is None else "corroboration"
    res.classifications.append(ClassificationRecord(param, cf, claim, role))


def _order_pipeline(member_claim: str, limit_claim: str, form: str):
    def run(cfg: ScenarioConfig) -> ScenarioResult:
        res = ScenarioResult(cfg.id)
        family = get_family(cfg.id)
        for n in list(cfg.n_list) + [None]:
            member = family(n)
            order = member.order if form == "jump" else member
            claim = member_claim if n is not None else limit_claim
            eps = order.params[0] if order.params[1] == 1.0 else None
            _order_records(res, _param(n), order, claim, eps)
        _classification_checks(res)
        if form == "jump":
            res.notes.append("jump forms with amplitude c(x) + 1 in [1, 2] are comparable to the Levy forms "
                             "of the same order, so they share recurrence and transience with them")
        orders = (lambda n: family(n).order) if form == "jump" else family
        res.assumptions.append(("orders, L1 on [0, 10]", check_assumption_sequence(
            lambda n: orders(n), orders(None), [(0.0, 10.0)], cfg.n_list)))
        if cfg.mosco:
            if form == "jump":
                build = lambda n, g: assemble_jump(family(n), g)
            else:
                build = lambda n, g: assemble_multiplier(LevyExponent(1, family(n)), g)
            report = run_mosco(build, cfg.n_list, _grid(cfg, PERIODIC), **_mosco_kwargs(cfg))
            res.reports.append(report)
            _mosco_check(res, report, f"{form} forms")
        return res
    return run


def _remark17(cfg: ScenarioConfig) -> ScenarioResult:
    res = ScenarioResult(cfg.id)
    for n in list(cfg.n_list) + [None]:
        e = build_member("remark17", n)
        alpha = 2.0 if n is None else 2.0 - 1.0 / n
        claim = RECURRENT if classical_stable_recurrent(alpha, 2) else TRANSIENT
        res.classifications.append(ClassificationRecord(_param(n), classify_chung_fuchs(e), claim))
    _classification_checks(res)

    def symbol(n):
        e = build_member("remark17", n)
        return lambda pts: e.radial_values(np.linalg.norm(pts, axis=1))

    trend = check_assumption_sequence(symbol, symbol(None), [(-1.0, 1.0), (-1.0, 1.0)], cfg.n_list, resolution=48)
    res.assumptions.append(("exponents, L1 on [-1, 1]^2", trend))
    res.checks.append(ClaimCheck("exponents converge locally in L1", "vanishing",
                                 ", ".join(f"{d:.3e}" for d in trend.distances), trend.vanishing))
    res.notes.append("two-dimensional forms are not discretised; local L1 convergence of the exponents "
                     "is the convergence evidence")
    return res


def _thm42(cfg: ScenarioConfig) -> ScenarioResult:
    res = ScenarioResult(cfg.id)
    for eps in cfg.eps_list:
        claim = RECURRENT if eps >= 1 else TRANSIENT
        sharp = classify_sharp_epsilon(eps, corroborate=False)
        param = f"eps={eps:g}"
        res.classifications.append(ClassificationRecord(param, sharp, claim))
        cf = classify_chung_fuchs(LevyExponent(1, make_sharp_log_order(eps, 1.0)))
        res.classifications.append(ClassificationRecord(param, cf, claim, "corroboration"))
    _classification_checks(res)
    return res


def _const_alpha(cfg: ScenarioConfig) -> ScenarioResult:
    res = ScenarioResult(cfg.id)
    for alpha in cfg.alpha_list:
        claim = RECURRENT if classical_stable_recurrent(alpha, 1) else TRANSIENT
        param = f"alpha={alpha:g}"
        order = OrderFunction.constant(alpha)
        res.classifications.append(ClassificationRecord(param, classify_chung_fuchs(LevyExponent(1, order)), claim))
        res.classifications.append(ClassificationRecord(param, classify_recurrence_u04(order), claim,
                                                        "corroboration"))
    _classification_checks(res)
    return res


SCENARIOS: dict[str, ScenarioSpec] = {
    "prop15i": ScenarioSpec("prop15i", "explosive diffusions converging to a conservative one", "prop15i",
                            {"n_list": (1, 2, 4)}, _feller_pipeline(EXPLOSIVE, CONSERVATIVE)),
    "prop15ii": ScenarioSpec("prop15ii", "conservative diffusions converging to an explosive one", "prop15ii",
                             {"n_list": (1, 2, 4)}, _feller_pipeline(CONSERVATIVE, EXPLOSIVE)),
    "prop16i": ScenarioSpec("prop16i", "recurrent Levy processes converging to a transient one", "prop16i",
                            {"n_list": (1, 2, 4)}, _order_pipeline(RECURRENT, TRANSIENT, "multiplier")),
    "prop16ii": ScenarioSpec("prop16ii", "transient Levy processes converging to a recurrent one", "prop16ii",
                             {"n_list": (2, 4, 8)}, _order_pipeline(TRANSIENT, RECURRENT, "multiplier")),
    "prop18i": ScenarioSpec("prop18i", "recurrent jump processes converging to a transient one", "prop18i",
                            {"n_list": (1, 2, 4)}, _order_pipeline(RECURRENT, TRANSIENT, "jump")),
    "prop18ii": ScenarioSpec("prop18ii", "transient jump processes converging to a recurrent one", "prop18ii",
                             {"n_list": (2, 4, 8)}, _order_pipeline(TRANSIENT, RECURRENT, "jump")),
    "remark17": ScenarioSpec("remark17", "transient stable processes on R^2 converging to Brownian motion",
                             "remark17", {"n_list": (1, 2, 4, 8, 16), "mosco": False}, _remark17),
    "thm42-sweep": ScenarioSpec("thm42-sweep", "sharp recurrence threshold eps >= 1", None,
                                {"eps_list": (0.25, 0.5, 0.75, 1.0, 1.25, 1.5), "mosco": False}, _thm42),
    "const-alpha-sweep": ScenarioSpec("const-alpha-sweep", "constant-order dichotomy in d = 1", None,
                                      {"alpha_list": (0.5, 1.0, 1.5, 1.9), "mosco": False}, _const_alpha),
}


def default_config(scenario_id: str, **overrides) -> ScenarioConfig:
    spec = SCENARIOS.get(scenario_id)
    if spec is None:
        raise ScenarioError(f"unknown scenario {scenario_id!r}; known: {', '.join(SCENARIOS)}")
    cfg = ScenarioConfig(scenario_id, **spec.defaults)
    return replace(cfg, **overrides) if overrides else cfg


def doubling_list(start: int, n_max: int) -> tuple[int, ...]:
    """``start, 2 start, 4 start, ...`` up to ``n_max``."""
    if n_max < start:
        raise ScenarioError(f"n_max {n_max} is below the smallest admissible index {start}")
    out, n = [], start
    while n <= n_max:
        out.append(n)
        n *= 2
    return tuple(out)


def run_scenario(cfg: ScenarioConfig) -> ScenarioResult:
    """Validate and execute; pipeline failures are re-raised with the scenario id."""
    cfg.validate()
    try:
        return SCENARIOS[cfg.id].pipeline(cfg)
    except ScenarioError:
        raise
    except Exception as exc:
        raise ScenarioError(f"scenario {cfg.id} failed: {exc}") from exc
