"""Plot-ready report files.

Every run writes the same four files, with headers only when a section has
no data: ``ne_table.csv``, ``session_trace.csv``, ``strategy_trace.csv`` and
``summary.json``. CSV files start with a ``#`` comment line carrying the
scenario digest and seed. Nothing time-dependent is written, so identical
runs give byte-identical files.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .model import Network
from .montecarlo import NeFrequencyTable, rolling_mean

NE_TABLE = "ne_table.csv"
SESSION_TRACE = "session_trace.csv"
STRATEGY_TRACE = "strategy_trace.csv"
SUMMARY = "summary.json"


@dataclass
class Results:
    scenario_hash: str
    seed: int
    n_su: int = 0
    ne_table: Optional[NeFrequencyTable] = None
    sessions: list = field(default_factory=list)
    strategy_trace: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    window: int = 50


def _label(a: int) -> str:
    return Network(a).label


def _fmt(x) -> str:
    return repr(float(x))


def _csv(header: list, rows: list, stamp: str) -> str:
    buf = io.StringIO()
    buf.write(stamp)
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def render(results: Results) -> dict:
    """File name -> file content."""
    stamp = f"# scenario={results.scenario_hash} seed={results.seed}\n"
    files = {}

    n_su = results.n_su
    header = [f"su{j + 1}" for j in range(n_su)] + ["utility", "count", "percent", "is_ne"]
    rows = []
    if results.ne_table is not None:
        for r in results.ne_table.rows:
            rows.append([_label(a) for a in r.assignment] + [_fmt(r.utility), r.count, _fmt(100.0 * r.frequency), int(r.is_ne)])
    files[NE_TABLE] = _csv(header, rows, stamp)

    header = [
        "session", "iteration", "phase", "beta", "reward", "rolling_mean",
        "converged", "stop_reason", "dna_iterations", "feasible_prefix", "assignment",
    ]
    rows = []
    for s, trace in enumerate(results.sessions):
        by_phase: dict = {}
        for rec in trace.records:
            by_phase.setdefault(rec.phase, []).append(rec)
        for phase in sorted(by_phase):
            recs = by_phase[phase]
            rolled = rolling_mean([r.reward for r in recs], results.window)
            for rec, rm in zip(recs, rolled):
                rows.append([
                    s, rec.iteration, rec.phase, _fmt(rec.beta), _fmt(rec.reward), _fmt(rm),
                    int(rec.converged), rec.stop_reason, rec.dna_iterations, rec.boundary,
                    "".join(str(int(a)) for a in rec.assignment),
                ])
    files[SESSION_TRACE] = _csv(header, rows, stamp)

    header = ["iteration", "su", "p_wifi", "p_laa", "p_lte", "action", "utility"]
    rows = []
    for step in results.strategy_trace:
        for j, (p, a) in enumerate(zip(step.strategies, step.actions)):
            rows.append([step.iteration, j + 1, _fmt(p[0]), _fmt(p[1]), _fmt(p[2]), _label(a), _fmt(step.utility)])
    files[STRATEGY_TRACE] = _csv(header, rows, stamp)

    summary = {"scenario": results.scenario_hash, "seed": results.seed, **results.summary}
    files[SUMMARY] = json.dumps(summary, indent=2, sort_keys=True, default=_json_default) + "\n"
    return files


def _json_default(obj):
    if isinstance(obj, tuple):
        return list(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def emit_reports(results: Results, out_dir) -> list:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, content in render(results).items():
        path = out / name
        path.write_text(content, encoding="utf-8")
        written.append(path)
    return written
