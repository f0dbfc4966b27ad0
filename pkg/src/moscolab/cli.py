"""Command-line scenario runner.

``moscolab run --scenario prop16i`` executes one scenario and writes its
table and summary; ``list-scenarios`` and ``check-invariants`` need no
arguments. Exit status is 0 when every claim check passes, 1 when one
fails and 2 for usage or configuration errors.
"""

from __future__ import annotations

import argparse
import configparser
import os
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

from .families import get_family
from .invariants import run_invariant_suite
from .report import emit_report, render_summary
from .scenarios import SCENARIOS, ScenarioConfig, ScenarioError, default_config, doubling_list, run_scenario

OUT_ENV = "MOSCOLAB_OUT"
DEFAULT_OUT = "results"


class ConfigError(ValueError):
    pass


_INT_LISTS = {"n": "n_list"}
_FLOAT_LISTS = {"eps": "eps_list", "alpha": "alpha_list", "lambdas": "lambdas", "times": "times"}
_STR_LISTS = {"f_ids": "f_ids"}
_INTS = {"grid_n": "grid_n", "semigroup_steps": "semigroup_steps", "workers": "workers"}
_FLOATS = {"grid_l": "grid_l"}
_BOOLS = {"mosco": "mosco"}
KNOWN_KEYS = set(_INT_LISTS) | set(_FLOAT_LISTS) | set(_STR_LISTS) | set(_INTS) | set(_FLOATS) | set(_BOOLS)


def _line_of(text: str, section: str, key: str) -> int | None:
    """Line number of ``key`` inside ``[section]``, for error messages."""
    current = None
    for i, line in enumerate(text.splitlines(), 1):
        m = re.match(r"\s*\[([^\]]+)\]", line)
        if m:
            current = m.group(1).strip()
        elif current == section and re.match(rf"\s*{re.escape(key)}\s*[=:]", line):
            return i
    return None


def _split(value: str) -> list[str]:
    return [v for v in re.split(r"[,\s]+", value.strip()) if v]


def load_config(path, scenario_id: str) -> tuple[dict, str | None]:
    """Overrides for ``scenario_id`` from an INI file, plus an optional output directory.

    Sections are named by scenario id; a ``[run]`` section may give ``out``.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise ConfigError(f"config {path}: {exc}") from exc
    for section in parser.sections():
        if section != "run" and section not in SCENARIOS:
            line = next((i for i, ln in enumerate(text.splitlines(), 1)
                         if re.match(rf"\s*\[{re.escape(section)}\]", ln)), "?")
            raise ConfigError(f"config {path}, line {line}: unknown section [{section}]")
    out = parser.get("run", "out", fallback=None)
    if not parser.has_section(scenario_id):
        return {}, out
    overrides = {}
    for key, raw in parser.items(scenario_id):
        where = f"config {path}, line {_line_of(text, scenario_id, key)}, [{scenario_id}] {key}"
        try:
            if key in _INT_LISTS:
                overrides[_INT_LISTS[key]] = tuple(int(v) for v in _split(raw))
            elif key in _FLOAT_LISTS:
                overrides[_FLOAT_LISTS[key]] = tuple(float(v) for v in _split(raw))
            elif key in _STR_LISTS:
                overrides[_STR_LISTS[key]] = tuple(_split(raw))
            elif key in _INTS:
                overrides[_INTS[key]] = int(raw)
            elif key in _FLOATS:
                overrides[_FLOATS[key]] = float(raw)
            elif key in _BOOLS:
                overrides[_BOOLS[key]] = parser.getboolean(scenario_id, key)
            else:
                raise ConfigError(f"unknown key (known: {', '.join(sorted(KNOWN_KEYS))})")
        except (ValueError, ConfigError) as exc:
            raise ConfigError(f"{where}: {exc}") from exc
    return overrides, out


def build_config(args, scenario_id: str) -> tuple[ScenarioConfig, Path]:
    overrides, config_out = ({}, None)
    if args.config:
        overrides, config_out = load_config(args.config, scenario_id)
    if args.grid_n is not None:
        overrides["grid_n"] = args.grid_n
    if args.grid_l is not None:
        overrides["grid_l"] = args.grid_l
    cfg = default_config(scenario_id, **overrides)
    if args.n_max is not None:
        spec = SCENARIOS[scenario_id]
        if spec.family is None:
            raise ConfigError(f"--n-max does not apply to {scenario_id}")
        cfg = replace(cfg, n_list=doubling_list(max(1, get_family(spec.family).min_index), args.n_max))
    out = Path(args.out or os.environ.get(OUT_ENV) or config_out or DEFAULT_OUT)
    return cfg.validate(), out


def _execute(cfg: ScenarioConfig, out: Path) -> tuple[str, int, str, str]:
    result = run_scenario(cfg)
    table, summary = emit_report(result, out)
    return cfg.id, result.exit_status, render_summary(result), f"{table}\n{summary}"


def cmd_run(args) -> int:
    ids = []
    for sid in args.scenario:
        ids.extend(SCENARIOS if sid == "all" else [sid])
    try:
        jobs = [build_config(args, sid) for sid in ids]
    except (ConfigError, ScenarioError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        if args.parallel and len(jobs) > 1:
            with ProcessPoolExecutor() as pool:
                outcomes = list(pool.map(_execute, *zip(*jobs)))
        else:
            outcomes = [_execute(cfg, out) for cfg, out in jobs]
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    status = 0
    for sid, code, summary, paths in outcomes:
        print(summary)
        print(f"wrote:\n{paths}\n")
        status = max(status, code)
    return status


def cmd_list(args) -> int:
    for sid, spec in SCENARIOS.items():
        print(f"{sid:<18} {spec.description}")
    return 0


def cmd_invariants(args) -> int:
    results = run_invariant_suite()
    for r in results:
        print(f"[{'pass' if r.passed else 'FAIL'}] {r.name}: {r.detail}")
    return 0 if all(r.passed for r in results) else 1


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="moscolab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run one or more scenarios")
    run.add_argument("--scenario", action="append", required=True,
                     choices=list(SCENARIOS) + ["all"], help="scenario id (repeatable; 'all' runs every one)")
    run.add_argument("--config", help="INI file with one section per scenario id")
    run.add_argument("--out", help=f"output directory (default: ${OUT_ENV} or ./{DEFAULT_OUT})")
    run.add_argument("--grid-n", type=int, help="grid points")
    run.add_argument("--grid-l", type=float, help="half-width of the grid window")
    run.add_argument("--n-max", type=int, help="use n = n0, 2 n0, 4 n0, ... up to this value")
    run.add_argument("--parallel", action="store_true", help="run scenarios in separate processes")
    run.set_defaults(func=cmd_run)
    sub.add_parser("list-scenarios", help="list scenario ids").set_defaults(func=cmd_list)
    sub.add_parser("check-invariants", help="run the property suites").set_defaults(func=cmd_invariants)
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
