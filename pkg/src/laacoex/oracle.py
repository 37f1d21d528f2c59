"""Exact reference solver: enumerate every access pattern, line-search beta.

Only meant for verification at small populations (3**N2 patterns).
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import DomainError, SizeError
from .model import (
    CoexistenceGame,
    ProtocolConfig,
    TrafficProfile,
    aggregates,
    iu_threshold,
    pure_wifi_throughput,
    validate_assignment,
    wifi_throughput,
)

ENUMERATION_CAP = 12
SUBSET_CAP = 20
DEFAULT_TOL = 1e-4

INV_PHI = (math.sqrt(5) - 1) / 2
INV_PHI2 = (3 - math.sqrt(5)) / 2


@dataclass(frozen=True)
class OracleResult:
    best_assignment: tuple
    best_beta: float
    best_value: float
    evaluations: int


def golden_section_max(f, a: float, b: float, tol: float) -> float:
    """Argmax of a unimodal ``f`` on ``[a, b]``, located to within ``tol``."""
    h = b - a
    if h <= tol:
        return a
    n = int(math.ceil(math.log(tol / h) / math.log(INV_PHI)))
    c = a + INV_PHI2 * h
    d = a + INV_PHI * h
    fc, fd = f(c), f(d)
    for _ in range(n - 1):
        h *= INV_PHI
        if fc >= fd:
            b, d, fd = d, c, fc
            c = a + INV_PHI2 * h
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * h
            fd = f(d)
    return c if fc >= fd else d


def _bisect_edge(pred, lo: float, hi: float, tol: float) -> float:
    """``pred`` is true at ``lo`` and false at ``hi``; returns a point where it is still true."""
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if pred(mid):
            lo = mid
        else:
            hi = mid
    return lo


def _feasible_interval(game: CoexistenceGame, g1: float, g2: float, tol: float):
    """Closed range of beta where both fairness constraints hold, or None.

    The SU-incentive constraint only gets easier as beta grows, with a
    closed-form lower edge. The IU-protection constraint only gets harder
    (WiFi throughput decreases in beta), so its upper edge is bisected.
    """
    theta = game.cfg.theta
    ratio = iu_threshold(game.g4)

    def iu_ok(beta):
        return game.g3 == 0 or game.wifi_throughput_at(g1, beta) / g1 >= ratio

    def su_ok(beta):
        return g2 == 0 or min(beta / theta, g2) >= g2 * ratio

    lo = theta * g2 * ratio
    while lo <= theta and not su_ok(lo):
        lo = math.nextafter(lo, math.inf)
    if lo > theta:
        return None
    if not iu_ok(lo):
        return None
    hi = theta if iu_ok(theta) else _bisect_edge(iu_ok, lo, theta, tol * 1e-3)
    return lo, hi


def _line_search(game: CoexistenceGame, assignment: tuple, tol: float) -> tuple[float, float, int]:
    agg = game.aggregates(assignment)
    bounds = _feasible_interval(game, agg.g1, agg.g2, tol)
    if bounds is None:
        return 0.0, 0.0, 1
    lo, hi = bounds
    calls = [0]

    def f(beta):
        calls[0] += 1
        return game.utility(assignment, beta)

    peak = min(hi, max(lo, golden_section_max(f, lo, hi, tol)))
    candidates = [peak, hi]
    # LAA saturates at theta*G2; with WiFi decreasing the peak often sits exactly there
    kink = game.cfg.theta * agg.g2
    if lo < kink < hi:
        candidates.insert(0, kink)
    best_beta, best_value = lo, f(lo)
    for beta in candidates:
        value = f(beta)
        if value > best_value:
            best_beta, best_value = beta, value
    if best_value == 0.0:
        return 0.0, 0.0, calls[0]
    return best_beta, best_value, calls[0]


def beta_optimum_for_partition(
    profile: TrafficProfile,
    assignment: Sequence[int],
    cfg: ProtocolConfig,
    tol: float = DEFAULT_TOL,
    game: Optional[CoexistenceGame] = None,
) -> tuple[float, float]:
    """Best LAA time for a fixed access pattern: ``(beta_star, utility)``.

    Golden-section search over the sub-interval of ``[0, theta]`` where both
    constraints hold; outside it the utility is identically zero. A pattern
    that is infeasible for every beta returns ``(0.0, 0.0)``.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    assignment = validate_assignment(profile, assignment)
    game = game or CoexistenceGame(profile, cfg)
    beta, value, _ = _line_search(game, assignment, tol)
    return beta, value


def exhaustive_optimum(
    profile: TrafficProfile,
    cfg: ProtocolConfig,
    tol: float = DEFAULT_TOL,
    fixed_beta: Optional[float] = None,
    cap: int = ENUMERATION_CAP,
) -> OracleResult:
    """Global optimum over all 3**N2 access patterns.

    With ``fixed_beta`` the line search is skipped and every pattern is
    scored at that beta. Ties keep the lexicographically smallest pattern
    (enumeration order) and then the smallest beta.
    """
    n2 = profile.n_su
    if n2 > cap:
        raise SizeError(f"exhaustive search over 3**{n2} patterns exceeds the cap N2 <= {cap}")
    game = CoexistenceGame(profile, cfg)
    lam2 = profile.lambda2
    # patterns with equal (G1, G2) share the same utility curve
    curve_cache: dict = {}
    best = None
    evaluations = 0
    for assignment in itertools.product(range(3), repeat=n2):
        if fixed_beta is not None:
            beta, value = fixed_beta, game.utility(assignment, fixed_beta)
            evaluations += 1
        else:
            key = (
                math.fsum(lam2[j] for j, a in enumerate(assignment) if a == 0),
                math.fsum(lam2[j] for j, a in enumerate(assignment) if a == 1),
            )
            hit = curve_cache.get(key)
            if hit is None:
                beta, value, calls = _line_search(game, assignment, tol)
                evaluations += calls
                curve_cache[key] = (beta, value)
            else:
                beta, value = hit
        if best is None or value > best[2]:
            best = (assignment, beta, value)
    assignment, beta, value = best
    return OracleResult(tuple(assignment), beta, value, evaluations)


@functools.lru_cache(maxsize=64)
def _wifi_loads(profile: TrafficProfile) -> list:
    """Distinct WiFi loads G1 over every subset of SUs joining the incumbents."""
    loads = set()
    for mask in itertools.product((False, True), repeat=profile.n_su):
        loads.add(math.fsum(profile.lambda1 + tuple(v for v, m in zip(profile.lambda2, mask) if m)))
    return tuple(sorted(loads))


def feasibility(
    profile: TrafficProfile,
    beta: float,
    cfg: ProtocolConfig,
    cap: int = SUBSET_CAP,
    game: Optional[CoexistenceGame] = None,
) -> bool:
    """True iff some set of WiFi SUs keeps the incumbents protected at ``beta``.

    SUs outside that set go to LTE, which makes the SU-incentive constraint
    vacuous. All 2**N2 subsets are tried.
    """
    if profile.n_su > cap:
        raise SizeError(f"subset search over 2**{profile.n_su} exceeds the cap N2 <= {cap}")
    game = game or CoexistenceGame(profile, cfg)
    if not 0 <= beta <= cfg.theta:
        raise DomainError(f"beta={beta} outside [0, theta]")
    if game.g3 == 0:
        return True
    ratio = iu_threshold(game.g4)
    for g1 in _wifi_loads(profile):
        if game.wifi_throughput_at(g1, beta) / g1 >= ratio:
            return True
    return False


def beta_max(profile: TrafficProfile, cfg: ProtocolConfig, game: Optional[CoexistenceGame] = None) -> Optional[float]:
    """Largest grid beta that is still feasible, by bisection over the grid.

    Returns None when even the smallest grid value is infeasible.
    """
    grid = cfg.beta_grid
    if not grid:
        raise ValueError("beta_grid is empty")
    game = game or CoexistenceGame(profile, cfg)

    def feasible(i):
        return feasibility(profile, grid[i], cfg, game=game)

    if not feasible(0):
        return None
    lo, hi = 0, len(grid) - 1
    if feasible(hi):
        return grid[hi]
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if feasible(mid):
            lo = mid
        else:
            hi = mid
    return grid[lo]


def wifi_consistency_gap(profile: TrafficProfile, cfg: ProtocolConfig) -> float:
    """Relative gap between the WiFi model at beta=0 with every SU on WiFi and R0.

    Both describe the same pure-WiFi network, so a large gap points at a
    transcription problem in the busy/useful period formulas.
    """
    agg = aggregates(profile, (0,) * profile.n_su)
    r0 = pure_wifi_throughput(agg.g4)
    if r0 == 0:
        return 0.0
    return (wifi_throughput(agg, 0.0, cfg) - r0) / r0
