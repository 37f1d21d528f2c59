"""Distributed network access: each smart user runs a learning automaton.

All SUs share one payoff (the total unlicensed throughput, or zero when a
fairness constraint breaks), which the base station broadcasts after every
round. Each SU updates its mixed strategy over {WiFi, LAA, LTE} with a
linear reward-inaction rule and never sees the other SUs' choices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

from .errors import DomainError, InvariantError
from .model import CoexistenceGame, Network, ProtocolConfig, TrafficProfile, validate_assignment
from .rng import py_random

SIMPLEX_TOL = 1e-12
# rounds allowed past n_max while strategies are still moving
HARD_LIMIT_FACTOR = 50
UNIFORM = (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)

MixedStrategy = tuple  # (p_wifi, p_laa, p_lte)


@dataclass(frozen=True)
class SLConfig:
    kappa: Union[float, tuple] = 0.08
    epsilon: float = 1e-2
    n_max: int = 5000

    def __post_init__(self):
        kappas = self.kappa if isinstance(self.kappa, (tuple, list)) else (self.kappa,)
        if isinstance(self.kappa, list):
            object.__setattr__(self, "kappa", tuple(self.kappa))
        if not kappas or any(not 0 < float(k) <= 1 for k in kappas):
            raise InvariantError(f"kappa must lie in (0, 1], got {self.kappa}")
        if not self.epsilon > 0:
            raise InvariantError(f"epsilon must be positive, got {self.epsilon}")
        if int(self.n_max) != self.n_max or self.n_max < 1:
            raise InvariantError(f"n_max must be a positive integer, got {self.n_max}")

    def kappas(self, n_su: int) -> tuple:
        if isinstance(self.kappa, tuple):
            if len(self.kappa) != n_su:
                raise InvariantError(f"{len(self.kappa)} step sizes given for {n_su} smart users")
            return tuple(float(k) for k in self.kappa)
        return (float(self.kappa),) * n_su


@dataclass(frozen=True)
class DnaStep:
    iteration: int
    actions: tuple
    utility: float
    strategies: tuple  # after the update of this iteration


@dataclass
class DnaOutcome:
    assignment: tuple
    converged: bool
    iterations: int
    final_utility: float
    stop_reason: str  # "pure", "inert" or "cap"
    strategies: tuple
    trace: Optional[list] = field(default=None, repr=False)

    @property
    def reward(self) -> float:
        """What the allocator learns from: the utility if converged, else 0."""
        return self.final_utility if self.converged else 0.0


def check_strategy(strategy: Sequence[float]) -> None:
    if len(strategy) != 3:
        raise InvariantError(f"mixed strategy needs 3 entries, got {len(strategy)}")
    if any(not 0.0 <= p <= 1.0 for p in strategy) or abs(math.fsum(strategy) - 1.0) > SIMPLEX_TOL:
        raise InvariantError(f"not a probability vector: {tuple(strategy)}")


def _draw(strategy, u: float) -> int:
    if u < strategy[0]:
        return 0
    if u < strategy[0] + strategy[1]:
        return 1
    return 2


def sample_action(strategy: MixedStrategy, rng) -> Network:
    """Draw one network choice. Consumes exactly one ``rng.random()`` call."""
    check_strategy(strategy)
    return Network(_draw(strategy, rng.random()))


def lri_update(strategy: MixedStrategy, chosen: int, u: float, kappa: float) -> MixedStrategy:
    """Linear reward-inaction step: move ``kappa * u`` of the mass toward ``chosen``."""
    if not 0.0 <= u <= 1.0:
        raise DomainError(f"payoff must lie in [0, 1], got {u}")
    step = kappa * u
    if step > 1.0:
        raise DomainError(f"kappa * u = {step} exceeds 1")
    return _lri(strategy, int(chosen), step)


def _lri(strategy, chosen: int, step: float):
    if step == 0.0:
        return strategy
    keep = 1.0 - step
    new = [p * keep for p in strategy]
    new[chosen] = strategy[chosen] + step * (1.0 - strategy[chosen])
    return tuple(new)


def modal_action(strategy: MixedStrategy) -> int:
    """Index of the largest probability; ties go to WiFi < LAA < LTE."""
    best = 0
    for k in (1, 2):
        if strategy[k] > strategy[best]:
            best = k
    return best


def run_dna(
    profile: TrafficProfile,
    beta: float,
    cfg: ProtocolConfig,
    sl: SLConfig,
    seed,
    trace: bool = False,
    game: Optional[CoexistenceGame] = None,
    initial: Optional[Sequence[MixedStrategy]] = None,
) -> DnaOutcome:
    """Play the access game at a fixed ``beta`` until every SU is (nearly) pure.

    SU ``j`` samples from its own stream ``py_random(seed, j)``. The run stops
    with ``stop_reason="pure"`` when every SU's largest probability is within
    ``epsilon`` of one, and with ``"inert"`` once ``n_max`` rounds have passed
    while no strategy has moved more than ``epsilon`` from where it started
    (every round paid zero). Strategies that did move keep learning past
    ``n_max``; ``HARD_LIMIT_FACTOR * n_max`` rounds is the last resort
    (``"cap"``).
    """
    n2 = profile.n_su
    if n2 < 1:
        raise ValueError("the access game needs at least one smart user")
    game = game or CoexistenceGame(profile, cfg)
    kappas = sl.kappas(n2)
    eps = sl.epsilon
    threshold = 1.0 - eps
    n_limit = HARD_LIMIT_FACTOR * sl.n_max
    streams = [py_random(seed, j).random for j in range(n2)]
    start = tuple(tuple(s) for s in initial) if initial is not None else (UNIFORM,) * n2
    for s in start:
        check_strategy(s)
    probs = list(start)
    utility_cache = game._cache
    records = [] if trace else None

    n = 0
    reason = None
    while True:
        actions = tuple(_draw(probs[j], streams[j]()) for j in range(n2))
        key = (actions, beta)
        u = utility_cache.get(key)
        if u is None:
            u = game.utility(actions, beta)
        if u > 0.0:
            for j in range(n2):
                probs[j] = _lri(probs[j], actions[j], kappas[j] * u)
        n += 1
        if trace:
            records.append(DnaStep(n, actions, u, tuple(probs)))
        if (u > 0.0 or n == 1) and all(max(p) >= threshold for p in probs):
            reason = "pure"
            break
        if n >= sl.n_max:
            if all(math.dist(p, p0) <= eps for p, p0 in zip(probs, start)):
                reason = "inert"
                break
            if n >= n_limit:
                reason = "cap"
                break

    assignment = tuple(modal_action(p) for p in probs)
    return DnaOutcome(
        assignment=assignment,
        converged=reason == "pure",
        iterations=n,
        final_utility=game.utility(assignment, beta),
        stop_reason=reason,
        strategies=tuple(probs),
        trace=records,
    )


def is_pure_ne(
    profile: TrafficProfile,
    assignment: Sequence[int],
    beta: float,
    cfg: ProtocolConfig,
    game: Optional[CoexistenceGame] = None,
) -> bool:
    """True iff no single SU can strictly raise the common utility by switching."""
    assignment = tuple(int(a) for a in validate_assignment(profile, assignment))
    game = game or CoexistenceGame(profile, cfg)
    return not profitable_deviations(game, assignment, beta)


def profitable_deviations(game: CoexistenceGame, assignment: tuple, beta: float) -> list:
    """All ``(su, network, gain)`` unilateral moves that strictly raise utility."""
    base = game.utility(assignment, beta)
    moves = []
    for j, current in enumerate(assignment):
        for k in range(3):
            if k == current:
                continue
            alt = assignment[:j] + (k,) + assignment[j + 1 :]
            gain = game.utility(alt, beta) - base
            if gain > 0:
                moves.append((j, Network(k), gain))
    return moves
