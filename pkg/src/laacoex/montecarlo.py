"""Seeded Monte-Carlo drivers for the access game and full sessions.

Trial ``i`` always draws from the same seed path, and results are merged in
trial order, so outputs do not depend on the number of worker processes.
"""

from __future__ import annotations

import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

from .allocator import SessionTrace, run_session
from .dna import is_pure_ne, run_dna
from .errors import InvariantError
from .model import CoexistenceGame
from .rng import seed_sequence
from .scenario import Scenario

# seed-path namespaces below the master seed
DNA_TRIALS = 2
SESSIONS = 3


@dataclass(frozen=True)
class TrialResult:
    index: int
    assignment: tuple
    converged: bool
    stop_reason: str
    iterations: int
    utility: float


@dataclass(frozen=True)
class NeRow:
    assignment: tuple
    utility: float
    count: int
    frequency: float
    is_ne: bool


@dataclass
class NeFrequencyTable:
    rows: list
    trials: int
    converged: int

    @property
    def non_converged(self) -> int:
        return self.trials - self.converged


@dataclass
class MonteCarloResult:
    beta: float
    table: NeFrequencyTable
    summary: dict
    trials: list = field(repr=False, default_factory=list)


def _dna_chunk(args) -> list:
    scenario, beta, phase, indices = args
    profile = scenario.phases[phase].profile
    game = CoexistenceGame(profile, scenario.protocol)
    out = []
    for i in indices:
        o = run_dna(profile, beta, scenario.protocol, scenario.sl, seed_sequence(scenario.seed, DNA_TRIALS, i), game=game)
        out.append(TrialResult(i, o.assignment, o.converged, o.stop_reason, o.iterations, o.final_utility))
    return out


def _chunks(n: int, parts: int) -> list:
    size = max(1, -(-n // max(1, parts * 4)))
    return [range(s, min(n, s + size)) for s in range(0, n, size)]


def _map(fn, jobs: list, parallelism: int) -> list:
    if parallelism <= 1 or len(jobs) <= 1:
        return [fn(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=parallelism) as pool:
        return list(pool.map(fn, jobs))


def tabulate(results: list, profile, beta: float, cfg) -> NeFrequencyTable:
    game = CoexistenceGame(profile, cfg)
    counts: dict = {}
    for t in results:
        if t.converged:
            counts[t.assignment] = counts.get(t.assignment, 0) + 1
    n = len(results)
    rows = [
        NeRow(a, game.utility(a, beta), c, c / n, is_pure_ne(profile, a, beta, cfg, game=game))
        for a, c in counts.items()
    ]
    rows.sort(key=lambda r: (-r.count, r.assignment))
    return NeFrequencyTable(rows=rows, trials=n, converged=sum(counts.values()))


def _quantiles(values: list) -> dict:
    if not values:
        return {"p10": None, "median": None, "p90": None}
    if len(values) == 1:
        v = float(values[0])
        return {"p10": v, "median": v, "p90": v}
    dec = statistics.quantiles(values, n=10, method="inclusive")
    return {"p10": dec[0], "median": statistics.median(values), "p90": dec[-1]}


def run_monte_carlo(
    scenario: Scenario,
    trials: int,
    parallelism: int = 1,
    beta: Optional[float] = None,
    phase: int = 0,
) -> MonteCarloResult:
    """Independent access-game runs at a fixed beta, tabulated by outcome."""
    if trials < 1:
        raise InvariantError("trials must be >= 1")
    beta = scenario.fixed_beta if beta is None else beta
    if beta is None:
        raise InvariantError("access-game Monte Carlo needs fixed_beta in the scenario or an explicit beta")
    profile = scenario.phases[phase].profile
    jobs = [(scenario, beta, phase, idx) for idx in _chunks(trials, parallelism)]
    results = [t for chunk in _map(_dna_chunk, jobs, parallelism) for t in chunk]
    table = tabulate(results, profile, beta, scenario.protocol)

    converged = [t for t in results if t.converged]
    utilities = [t.utility for t in converged]
    summary = {
        "mode": "dna",
        "beta": beta,
        "phase": phase,
        "trials": trials,
        "converged": len(converged),
        "convergence_rate": len(converged) / trials,
        "mean_converged_utility": statistics.fmean(utilities) if utilities else None,
        "ne_certified_fraction": (
            sum(r.count for r in table.rows if r.is_ne) / table.converged if table.converged else None
        ),
        "stop_reasons": {k: sum(t.stop_reason == k for t in results) for k in ("pure", "inert", "cap")},
        "iterations": _quantiles([t.iterations for t in results]),
    }
    return MonteCarloResult(beta=beta, table=table, summary=summary, trials=results)


def _session_job(args) -> SessionTrace:
    scenario, index = args
    return run_session(
        scenario.schedule, scenario.protocol, scenario.allocator, scenario.sl, seed_sequence(scenario.seed, SESSIONS, index)
    )


def run_sessions(scenario: Scenario, trials: int = 1, parallelism: int = 1) -> list:
    """``trials`` independent two-level sessions, one trace each, in index order."""
    if trials < 1:
        raise InvariantError("trials must be >= 1")
    return _map(_session_job, [(scenario, i) for i in range(trials)], parallelism)


def rolling_mean(values: list, window: int) -> list:
    out, acc = [], 0.0
    for i, v in enumerate(values):
        acc += v
        if i >= window:
            acc -= values[i - window]
        out.append(acc / min(i + 1, window))
    return out


def session_summary(traces: list, n_phases: int, burn_in: int = 100, window: int = 50) -> dict:
    phases = []
    for ph in range(n_phases):
        rewards = [r.reward for tr in traces for r in tr.records if r.phase == ph]
        per_trace = [[r.reward for r in tr.records if r.phase == ph] for tr in traces]
        tail = [x for rs in per_trace for x in rs[burn_in:]]
        nonzero_tail = [[x for x in rs[burn_in:] if x > 0] for rs in per_trace]
        rolled = [v for nz in nonzero_tail for v in rolling_mean(nz, window)]
        phases.append(
            {
                "phase": ph,
                "iterations": len(rewards),
                "mean_reward": statistics.fmean(rewards) if rewards else None,
                "mean_reward_after_burn_in": statistics.fmean(tail) if tail else None,
                "mean_rolling_nonzero_after_burn_in": statistics.fmean(rolled) if rolled else None,
                "min_rolling_nonzero_after_burn_in": min(rolled) if rolled else None,
                "zero_reward_fraction": (sum(x == 0 for x in rewards) / len(rewards)) if rewards else None,
            }
        )
    return {
        "mode": "session",
        "sessions": len(traces),
        "burn_in": burn_in,
        "window": window,
        "terminated_early": [tr.terminated for tr in traces],
        "phases": phases,
    }
