"""Scenario tables and plain-text summaries.

Output is a pure function of the result object: numbers are printed in a
fixed format and rows keep pipeline order, so identical inputs give
byte-identical files.
"""

from __future__ import annotations

import csv
import io
from pathlib import Path

from .mosco import PROXY_NOTE, decreasing_trend
from .scenarios import ScenarioResult

CSV_COLUMNS = ("scenario", "id_param", "method", "verdict", "energy_err", "resolvent_err", "semigroup_err",
               "notes")


def _num(x) -> str:
    return f"{x:.12e}"


def table_rows(result: ScenarioResult) -> list[list[str]]:
    rows = []
    for rec in result.classifications:
        c = rec.classification
        notes = [f"role={rec.role}"]
        if c.depth is not None:
            notes.append(f"depth={c.depth}")
        if c.last_partial is not None:
            notes.append(f"last_partial={_num(c.last_partial)}")
        if rec.claim is not None:
            notes.append(f"claim={rec.claim}")
            notes.append(f"consistent={'yes' if rec.consistent else 'no'}")
        if c.note:
            notes.append(c.note)
        rows.append([result.scenario, rec.param, c.method, c.property, "", "", "", "; ".join(notes)])
    for report in result.reports:
        for e in report.entries:
            rows.append([result.scenario, f"n={e.n}", "MoscoResolvent", "", _num(e.energy_err),
                         _num(e.resolvent_err), _num(e.semigroup_err),
                         f"lambda={e.lam!r}; t={e.t!r}; f={e.f_id}"])
        sens = "" if report.window_sensitivity is None else f"; window_sensitivity={_num(report.window_sensitivity)}"
        rows.append([result.scenario, "family", "MoscoDiagnostic", report.verdict, "", "", "",
                     f"threshold={report.threshold!r}; decreasing_trend={'yes' if decreasing_trend(report) else 'no'}"
                     + sens])
    for label, trend in result.assumptions:
        dists = " ".join(f"n={n}:{_num(d)}" for n, d in zip(trend.indices, trend.distances))
        rows.append([result.scenario, "family", "L1LocalCheck", trend.flag, "", "", "", f"{label}; {dists}"])
    return rows


def render_csv(result: ScenarioResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    writer.writerows(table_rows(result))
    return buf.getvalue()


def render_summary(result: ScenarioResult) -> str:
    lines = [f"scenario: {result.scenario}", f"note: {PROXY_NOTE}", ""]
    if result.classifications:
        lines.append("classifications:")
        for rec in result.classifications:
            c = rec.classification
            claim = "" if rec.claim is None else f" (expected {rec.claim}, {'ok' if rec.consistent else 'MISMATCH'})"
            lines.append(f"  {rec.param:<12} {c.method:<13} {c.property}{claim} [{rec.role}]")
    else:
        lines.append("no classifications")
    for report in result.reports:
        lines.append("")
        lines.append(f"mosco diagnostic: verdict {report.verdict} (threshold {report.threshold:g})")
        for n in report.indices:
            lines.append(f"  n={n:<6} max resolvent error {report.max_resolvent_error(n):.3e}")
        if report.window_sensitivity is not None:
            lines.append(f"  doubled-window change of the last error: {report.window_sensitivity:.3f}")
    for label, trend in result.assumptions:
        lines.append("")
        lines.append(f"coefficient convergence ({label}): {trend.flag}")
    if result.notes:
        lines.append("")
        lines.extend(f"note: {n}" for n in result.notes)
    lines.append("")
    lines.append("claim checks:")
    if not result.checks:
        lines.append("  none")
    for chk in result.checks:
        lines.append(f"  [{'pass' if chk.passed else 'FAIL'}] {chk.label}: {chk.observed}")
    lines.append("")
    lines.append(f"overall: {'all claim checks pass' if result.passed else 'some claim checks FAIL'}")
    return "\n".join(lines) + "\n"


def emit_report(result: ScenarioResult, out) -> tuple[Path, Path]:
    """Write ``<scenario>.csv``, ``<scenario>_summary.txt`` and, per Mosco report,
    ``<scenario>_mosco.csv``. Returns the table and summary paths."""
    out = Path(out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        table = out / f"{result.scenario}.csv"
        summary = out / f"{result.scenario}_summary.txt"
        table.write_text(render_csv(result), encoding="utf-8")
        summary.write_text(render_summary(result), encoding="utf-8")
        for i, report in enumerate(result.reports):
            suffix = "" if i == 0 else f"_{i}"
            report.write_csv(out / f"{result.scenario}_mosco{suffix}.csv")
    except OSError as exc:
        raise OSError(f"cannot write report under {out}: {exc}") from exc
    return table, summary
