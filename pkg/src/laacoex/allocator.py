"""Resource allocation: stateless Q-learning over the LAA transmission time grid.

The base station keeps one Q-value per grid beta and restricts both
exploration and exploitation to the betas believed feasible, plus a few
"trial" betas just past the feasibility boundary. Observed rewards move the
boundary in either direction.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from .dna import SLConfig, run_dna
from .errors import DomainError, InvariantError, UnrecoverableScenarioError
from .model import CoexistenceGame, ProtocolConfig, TrafficProfile
from .oracle import beta_max
from .rng import py_random, seed_sequence

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AllocatorConfig:
    omega: float = 0.1
    alpha: float = 0.1
    delta: int = 5

    def __post_init__(self):
        if not 0 < self.omega < 1:
            raise InvariantError(f"omega must lie in (0, 1), got {self.omega}")
        if not 0 < self.alpha <= 1:
            raise InvariantError(f"alpha must lie in (0, 1], got {self.alpha}")
        if int(self.delta) != self.delta or self.delta < 0:
            raise InvariantError(f"delta must be a non-negative integer, got {self.delta}")


@dataclass
class AllocatorState:
    """Q-table plus the feasible/infeasible split of the grid.

    The feasible set is always a prefix of the grid, so the split is stored
    as a single boundary index: ``grid[:boundary]`` is feasible.
    """

    grid: tuple
    q: list
    boundary: int
    delta: int
    current_beta: Optional[float] = None

    @property
    def feasible_set(self) -> tuple:
        return self.grid[: self.boundary]

    @property
    def infeasible_set(self) -> tuple:
        return self.grid[self.boundary :]

    @property
    def trial_set(self) -> tuple:
        return self.grid[self.boundary : self.boundary + self.delta]

    def index(self, beta: float) -> int:
        try:
            return self.grid.index(beta)
        except ValueError:
            raise DomainError(f"beta={beta} is not on the action grid") from None

    def reset_q(self) -> None:
        self.q = [0.0] * len(self.grid)


def init_allocator(
    profile: TrafficProfile,
    cfg: ProtocolConfig,
    acfg: AllocatorConfig,
    rng,
    game: Optional[CoexistenceGame] = None,
) -> AllocatorState:
    grid = cfg.beta_grid
    if not grid:
        raise InvariantError("beta grid is empty")
    top = beta_max(profile, cfg, game=game)
    if top is None:
        raise UnrecoverableScenarioError(
            f"no feasible LAA time on the grid (smallest beta {grid[0]} already violates IU protection)"
        )
    state = AllocatorState(grid=grid, q=[0.0] * len(grid), boundary=grid.index(top) + 1, delta=int(acfg.delta))
    state.current_beta = rng.choice(state.feasible_set)
    return state


def q_update(state: AllocatorState, beta: float, r: float, alpha: float) -> AllocatorState:
    if not 0.0 <= r <= 1.0:
        raise DomainError(f"reward must lie in [0, 1], got {r}")
    i = state.index(beta)
    state.q[i] += alpha * (r - state.q[i])
    return state


def refresh_sets(state: AllocatorState, beta_used: float, r: float) -> AllocatorState:
    """Move the feasibility boundary when ``beta_used`` contradicts it.

    A zero reward at a feasible beta makes it and everything above
    infeasible; a nonzero reward at a trial beta makes it and everything
    below feasible. Either move clears the whole Q-table.
    """
    i = state.index(beta_used)
    if i < state.boundary and r == 0:
        state.boundary = i
        state.reset_q()
    elif state.boundary <= i < state.boundary + state.delta and r != 0:
        state.boundary = i + 1
        state.reset_q()
    return state


def select_beta(state: AllocatorState, acfg: AllocatorConfig, rng) -> float:
    if state.boundary == 0:
        raise UnrecoverableScenarioError("feasible beta set is empty")
    if rng.random() < acfg.omega:
        return rng.choice(state.feasible_set + state.trial_set)
    q = state.q
    best = 0
    for i in range(1, state.boundary):
        if q[i] > q[best]:
            best = i
    return state.grid[best]


@dataclass(frozen=True)
class SessionRecord:
    iteration: int
    phase: int
    beta: float
    reward: float
    converged: bool
    stop_reason: str
    dna_iterations: int
    assignment: tuple
    boundary: int  # feasible-prefix length after this iteration's refresh


@dataclass
class SessionTrace:
    records: list = field(default_factory=list)
    terminated: bool = False  # ran out of smart users

    def phase_rewards(self, phase: int) -> list:
        return [r.reward for r in self.records if r.phase == phase]


def run_session(
    schedule: Sequence[tuple],
    cfg: ProtocolConfig,
    acfg: AllocatorConfig,
    sl: SLConfig,
    seed,
    iterations: Optional[int] = None,
    on_record: Optional[Callable[[SessionRecord], None]] = None,
) -> SessionTrace:
    """Alternate allocation and access rounds over a schedule of populations.

    ``schedule`` is a list of ``(duration, TrafficProfile)`` phases. Each
    phase starts from a freshly initialized allocator and uniform SU
    strategies. A phase without smart users ends the session. ``iterations``
    optionally caps the total number of rounds.
    """
    if iterations is not None and iterations < 1:
        raise ValueError("iterations must be >= 1")
    trace = SessionTrace()
    total = 0
    for phase, (duration, profile) in enumerate(schedule):
        if profile.n_su == 0:
            trace.terminated = True
            break
        game = CoexistenceGame(profile, cfg)
        rng = py_random(seed, 0, phase)
        state = init_allocator(profile, cfg, acfg, rng, game=game)
        beta = state.current_beta
        for _ in range(int(duration)):
            if iterations is not None and total >= iterations:
                return trace
            outcome = run_dna(profile, beta, cfg, sl, seed=seed_sequence(seed, 1, total), game=game)
            r = outcome.reward
            q_update(state, beta, r, acfg.alpha)
            refresh_sets(state, beta, r)
            record = SessionRecord(
                iteration=total,
                phase=phase,
                beta=beta,
                reward=r,
                converged=outcome.converged,
                stop_reason=outcome.stop_reason,
                dna_iterations=outcome.iterations,
                assignment=outcome.assignment,
                boundary=state.boundary,
            )
            trace.records.append(record)
            if on_record is not None:
                on_record(record)
            total += 1
            beta = state.current_beta = select_beta(state, acfg, rng)
    return trace
