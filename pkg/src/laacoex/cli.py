"""Command-line entry point: ``laacoex {oracle,dna,session,betamax}``."""

from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys

from .dna import run_dna
from .errors import LaaCoexError
from .model import CoexistenceGame, Network
from .montecarlo import DNA_TRIALS, run_monte_carlo, run_sessions, session_summary
from .oracle import beta_max, exhaustive_optimum, feasibility, wifi_consistency_gap
from .reports import Results, emit_reports
from .rng import seed_sequence
from .scenario import load_scenario

OUT_ENV = "LAACOEX_OUT"
EXIT_CODES = {"parse": 2, "invariant": 3, "unrecoverable": 4, "io": 5, "error": 1}

log = logging.getLogger("laacoex")


def _labels(assignment) -> list:
    return [Network(a).label for a in assignment]


def cmd_oracle(scenario, args) -> Results:
    phases = []
    for i, ph in enumerate(scenario.phases):
        fixed = None if args.line_search else scenario.fixed_beta
        res = exhaustive_optimum(ph.profile, scenario.protocol, tol=args.tol, fixed_beta=fixed)
        phases.append({
            "phase": i,
            "n_su": ph.profile.n_su,
            "fixed_beta": fixed,
            "best_assignment": _labels(res.best_assignment),
            "best_beta": res.best_beta,
            "best_value": res.best_value,
            "evaluations": res.evaluations,
            "wifi_consistency_gap": wifi_consistency_gap(ph.profile, scenario.protocol),
        })
        log.info("phase %d: optimum %.6f at beta=%.6f", i, res.best_value, res.best_beta)
    return Results(scenario.digest(), scenario.seed, summary={"mode": "oracle", "phases": phases})


def cmd_betamax(scenario, args) -> Results:
    phases = []
    cfg = scenario.protocol
    for i, ph in enumerate(scenario.phases):
        game = CoexistenceGame(ph.profile, cfg)
        top = beta_max(ph.profile, cfg, game=game)
        phases.append({
            "phase": i,
            "beta_max": top,
            "feasible_grid": [b for b in cfg.beta_grid if feasibility(ph.profile, b, cfg, game=game)],
            "wifi_consistency_gap": wifi_consistency_gap(ph.profile, cfg),
        })
        log.info("phase %d: beta_max = %s", i, top)
    return Results(scenario.digest(), scenario.seed, summary={"mode": "betamax", "phases": phases})


def cmd_dna(scenario, args) -> Results:
    mc = run_monte_carlo(scenario, args.trials, args.parallelism, beta=args.beta, phase=args.phase)
    profile = scenario.phases[args.phase].profile
    strategy_trace = []
    first = next((t for t in mc.trials if t.converged), None)
    if first is not None:
        # replay one converged trial with tracing on; same seed path, same draws
        outcome = run_dna(
            profile, mc.beta, scenario.protocol, scenario.sl,
            seed_sequence(scenario.seed, DNA_TRIALS, first.index), trace=True,
        )
        strategy_trace = outcome.trace
    summary = dict(mc.summary)
    summary["traced_trial"] = None if first is None else first.index
    log.info(
        "%d trials: mean converged utility %s, convergence rate %.4f",
        args.trials, summary["mean_converged_utility"], summary["convergence_rate"],
    )
    return Results(
        scenario.digest(), scenario.seed, n_su=profile.n_su, ne_table=mc.table,
        strategy_trace=strategy_trace, summary=summary,
    )


def cmd_session(scenario, args) -> Results:
    traces = run_sessions(scenario, args.trials, args.parallelism)
    summary = session_summary(traces, len(scenario.phases), burn_in=args.burn_in, window=args.window)
    if args.with_oracle:
        for ph, entry in zip(scenario.phases, summary["phases"]):
            opt = exhaustive_optimum(ph.profile, scenario.protocol)
            entry["oracle_value"] = opt.best_value
            entry["oracle_beta"] = opt.best_beta
            m = entry["mean_rolling_nonzero_after_burn_in"]
            entry["ratio_to_oracle"] = None if m is None or opt.best_value == 0 else m / opt.best_value
    return Results(scenario.digest(), scenario.seed, sessions=traces, summary=summary, window=args.window)


COMMANDS = {"oracle": cmd_oracle, "dna": cmd_dna, "session": cmd_session, "betamax": cmd_betamax}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="laacoex", description="LAA/WiFi coexistence learning simulator")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, trials):
        p.add_argument("--scenario", required=True, help="scenario YAML path or shipped name (table1, fig5)")
        p.add_argument("--seed", type=int, default=None, help="override the scenario's master seed")
        p.add_argument("--trials", type=int, default=trials)
        p.add_argument("--out", default=None, help=f"output directory (default ${OUT_ENV} or ./out)")
        p.add_argument("--parallelism", type=int, default=1)
        p.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)

    p = sub.add_parser("oracle", help="exhaustive optimum per phase")
    common(p, 1)
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--line-search", action="store_true", help="optimize beta even if fixed_beta is set")

    p = sub.add_parser("dna", help="Monte-Carlo runs of the access game at a fixed beta")
    common(p, 10_000)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--phase", type=int, default=0)

    p = sub.add_parser("session", help="full two-level learning sessions")
    common(p, 1)
    p.add_argument("--burn-in", type=int, default=100)
    p.add_argument("--window", type=int, default=50)
    p.add_argument("--with-oracle", action="store_true", help="compare each phase with its exhaustive optimum")

    p = sub.add_parser("betamax", help="feasibility analysis over the beta grid")
    common(p, 1)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    out_dir = args.out or os.environ.get(OUT_ENV) or "out"
    try:
        scenario = load_scenario(args.scenario)
        if args.seed is not None:
            scenario = dataclasses.replace(scenario, seed=args.seed)
        results = COMMANDS[args.command](scenario, args)
        for path in emit_reports(results, out_dir):
            print(path)
    except LaaCoexError as exc:
        print(f"error ({exc.category}): {exc}", file=sys.stderr)
        return EXIT_CODES.get(exc.category, 1)
    except OSError as exc:
        print(f"error (io): {exc}", file=sys.stderr)
        return EXIT_CODES["io"]
    return 0


if __name__ == "__main__":
    sys.exit(main())
