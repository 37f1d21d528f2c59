import csv
import json
import os
import subprocess
import sys

import pytest

from laacoex.cli import main
from laacoex.montecarlo import rolling_mean, run_monte_carlo, run_sessions, session_summary
from laacoex.reports import NE_TABLE, SESSION_TRACE, STRATEGY_TRACE, SUMMARY, Results, emit_reports, render
from laacoex.scenario import load_scenario, parse_scenario

SMALL = """\
name: small
seed: 11
protocol:
  theta: 30
  sigma: 0.002
  beta_grid: {start: 0.5, stop: 4.0, step: 0.5}
fixed_beta: 1.5
sl:
  kappa: 0.3
  epsilon: 0.01
  n_max: 300
phases:
  - duration: 15
    lambda1: [0.03, 0.05, 0.08]
    lambda2: [0.05, 0.3, 0.1]
  - duration: 10
    lambda1: [0.1, 0.2]
    lambda2: [0.05, 0.02]
"""


@pytest.fixture
def small(tmp_path):
    path = tmp_path / "small.yaml"
    path.write_text(SMALL)
    return path


def read_dir(path):
    return {p.name: p.read_bytes() for p in sorted(path.iterdir())}


class TestMonteCarlo:
    def test_parallelism_does_not_change_results(self):
        sc = load_scenario("table1")
        a = run_monte_carlo(sc, 2, parallelism=1)
        b = run_monte_carlo(sc, 2, parallelism=8)
        assert a.trials == b.trials
        assert render(Results("x", 1, 6, ne_table=a.table, summary=a.summary)) == render(
            Results("x", 1, 6, ne_table=b.table, summary=b.summary)
        )

    def test_table_counts(self, small):
        sc = load_scenario(small)
        mc = run_monte_carlo(sc, 40)
        assert mc.table.trials == 40
        assert sum(r.count for r in mc.table.rows) == mc.table.converged
        counts = [r.count for r in mc.table.rows]
        assert counts == sorted(counts, reverse=True)
        assert sum(mc.summary["stop_reasons"].values()) == 40

    def test_needs_beta(self):
        sc = parse_scenario(SMALL.replace("fixed_beta: 1.5\n", ""))
        with pytest.raises(Exception):
            run_monte_carlo(sc, 2)

    def test_sessions_summary(self, small):
        sc = load_scenario(small)
        traces = run_sessions(sc, 2)
        summary = session_summary(traces, 2, burn_in=5, window=3)
        assert [p["iterations"] for p in summary["phases"]] == [30, 20]


def test_rolling_mean():
    assert rolling_mean([1, 2, 3, 4], 2) == [1.0, 1.5, 2.5, 3.5]
    assert rolling_mean([], 5) == []


class TestReports:
    def test_headers_only(self, tmp_path):
        paths = emit_reports(Results("abc", 3), tmp_path)
        assert {p.name for p in paths} == {NE_TABLE, SESSION_TRACE, STRATEGY_TRACE, SUMMARY}
        for name in (NE_TABLE, SESSION_TRACE, STRATEGY_TRACE):
            lines = (tmp_path / name).read_text().splitlines()
            assert lines[0] == "# scenario=abc seed=3"
            assert len(lines) == 2
        assert json.loads((tmp_path / SUMMARY).read_text()) == {"scenario": "abc", "seed": 3}

    def test_ne_table_rows(self, tmp_path, small):
        sc = load_scenario(small)
        mc = run_monte_carlo(sc, 20)
        emit_reports(Results(sc.digest(), sc.seed, 3, ne_table=mc.table, summary=mc.summary), tmp_path)
        with open(tmp_path / NE_TABLE) as fh:
            rows = list(csv.reader(line for line in fh if not line.startswith("#")))
        assert rows[0] == ["su1", "su2", "su3", "utility", "count", "percent", "is_ne"]
        assert len(rows) - 1 == len(mc.table.rows)
        assert all(r[0] in ("WiFi", "LAA", "LTE") for r in rows[1:])


class TestCli:
    def test_session_byte_identical_across_parallelism(self, tmp_path, small):
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(["session", "--scenario", str(small), "--trials", "2", "--out", str(a)]) == 0
        assert main(["session", "--scenario", str(small), "--trials", "2", "--out", str(b), "--parallelism", "8"]) == 0
        assert read_dir(a) == read_dir(b)

    def test_dna_repeatable(self, tmp_path, small):
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            assert main(["dna", "--scenario", str(small), "--trials", "20", "--out", str(out)]) == 0
        assert read_dir(a) == read_dir(b)
        summary = json.loads((a / SUMMARY).read_text())
        assert summary["trials"] == 20

    def test_seed_override_changes_stamp(self, tmp_path, small):
        assert main(["betamax", "--scenario", str(small), "--seed", "99", "--out", str(tmp_path)]) == 0
        assert (tmp_path / NE_TABLE).read_text().startswith("# scenario=")
        assert json.loads((tmp_path / SUMMARY).read_text())["seed"] == 99

    def test_oracle(self, tmp_path, small):
        assert main(["oracle", "--scenario", str(small), "--out", str(tmp_path)]) == 0
        phases = json.loads((tmp_path / SUMMARY).read_text())["phases"]
        assert len(phases) == 2
        assert phases[0]["fixed_beta"] == 1.5

    def test_out_from_environment(self, tmp_path, small, monkeypatch):
        monkeypatch.setenv("LAACOEX_OUT", str(tmp_path / "env"))
        assert main(["betamax", "--scenario", str(small)]) == 0
        assert (tmp_path / "env" / SUMMARY).exists()

    def test_parse_error_exit_code(self, tmp_path):
        bad = tmp_path / "bad.yaml"
        bad.write_text("protocol: [\n")
        assert main(["oracle", "--scenario", str(bad), "--out", str(tmp_path)]) == 2

    def test_invariant_error_exit_code(self, tmp_path):
        bad = tmp_path / "neg.yaml"
        bad.write_text(SMALL.replace("[0.05, 0.02]", "[0.05, -0.02]"))
        assert main(["oracle", "--scenario", str(bad), "--out", str(tmp_path)]) == 3

    def test_unrecoverable_exit_code(self, tmp_path):
        bad = tmp_path / "tight.yaml"
        bad.write_text(SMALL.replace("{start: 0.5, stop: 4.0, step: 0.5}", "[29.5]").replace("fixed_beta: 1.5\n", ""))
        assert main(["session", "--scenario", str(bad), "--out", str(tmp_path)]) == 4

    def test_verbose_either_side(self, tmp_path, small):
        assert main(["-v", "betamax", "--scenario", str(small), "--out", str(tmp_path)]) == 0
        assert main(["betamax", "-v", "--scenario", str(small), "--out", str(tmp_path)]) == 0

    def test_console_entry(self, tmp_path, small):
        proc = subprocess.run(
            [sys.executable, "-m", "laacoex.cli", "betamax", "--scenario", str(small), "--out", str(tmp_path)],
            capture_output=True, text=True, env={**os.environ},
        )
        assert proc.returncode == 0
        assert SUMMARY in proc.stdout
