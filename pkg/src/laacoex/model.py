"""Closed-form throughput model of an unlicensed band shared by LAA and WiFi.

Time is normalized by the packet transmission time: ``theta`` is the frame
length, ``beta`` the LAA transmission time inside a frame, ``gamma = theta -
beta`` the WiFi share and ``sigma`` the CSMA mini-slot length. Traffic is
Poisson with per-user rates ``lambda1`` (incumbent WiFi users) and
``lambda2`` (smart users that may pick WiFi, LAA or licensed LTE).

All functions here are pure.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Sequence

from .errors import DegenerateTrafficError, DimensionError, DomainError, InvariantError

logger = logging.getLogger(__name__)

CLAMP_WARN_TOL = 1e-6


class Network(IntEnum):
    WIFI = 0
    LAA = 1
    LTE = 2

    @property
    def label(self) -> str:
        return {0: "WiFi", 1: "LAA", 2: "LTE"}[int(self)]


Assignment = tuple  # tuple[int, ...] of Network values, one per smart user


def default_beta_grid() -> tuple[float, ...]:
    """The 0.1-spaced grid {0.1, ..., 9.9}."""
    return tuple(round(0.1 * i, 10) for i in range(1, 100))


@dataclass(frozen=True)
class ProtocolConfig:
    theta: float = 30.0
    sigma: float = 0.002
    beta_grid: tuple[float, ...] = field(default_factory=default_beta_grid)

    def __post_init__(self):
        object.__setattr__(self, "theta", float(self.theta))
        object.__setattr__(self, "sigma", float(self.sigma))
        object.__setattr__(self, "beta_grid", tuple(float(b) for b in self.beta_grid))
        if not (self.theta > 0 and math.isfinite(self.theta)):
            raise InvariantError(f"theta must be positive, got {self.theta}")
        if not 0 < self.sigma < 1:
            raise InvariantError(f"sigma must lie in (0, 1), got {self.sigma}")
        grid = self.beta_grid
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise InvariantError("beta_grid must be strictly increasing")
        if any(not 0 < b <= self.theta for b in grid):
            raise InvariantError("beta_grid values must lie in (0, theta]")


@dataclass(frozen=True)
class TrafficProfile:
    lambda1: tuple[float, ...] = ()
    lambda2: tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "lambda1", tuple(float(x) for x in self.lambda1))
        object.__setattr__(self, "lambda2", tuple(float(x) for x in self.lambda2))
        for name in ("lambda1", "lambda2"):
            for i, rate in enumerate(getattr(self, name)):
                if not (rate > 0 and math.isfinite(rate)):
                    raise InvariantError(f"{name}[{i}] must be a positive rate, got {rate}")

    @property
    def n_iu(self) -> int:
        return len(self.lambda1)

    @property
    def n_su(self) -> int:
        return len(self.lambda2)


@dataclass(frozen=True)
class Aggregates:
    g1: float  # WiFi network: IUs plus SUs on WiFi
    g2: float  # SUs on LAA
    g3: float  # IUs only
    g4: float  # everybody on WiFi
    z: float


@dataclass(frozen=True)
class ThroughputBreakdown:
    r_wifi: float
    r_laa: float

    @property
    def r_total(self) -> float:
        return self.r_wifi + self.r_laa


def validate_assignment(profile: TrafficProfile, assignment: Sequence[int]) -> tuple:
    if len(assignment) != profile.n_su:
        raise DimensionError(
            f"assignment has {len(assignment)} entries for {profile.n_su} smart users"
        )
    try:
        return tuple(Network(a) for a in assignment)
    except ValueError as exc:
        raise InvariantError(f"invalid network choice in {tuple(assignment)}") from exc


def partition(assignment: Sequence[int]) -> tuple[frozenset, frozenset, frozenset]:
    """Index sets (S1, S2, S3) of SUs on WiFi, LAA and LTE."""
    sets = ([], [], [])
    for j, a in enumerate(assignment):
        sets[int(a)].append(j)
    return tuple(frozenset(s) for s in sets)


def aggregates(profile: TrafficProfile, assignment: Sequence[int]) -> Aggregates:
    validate_assignment(profile, assignment)
    lam2 = profile.lambda2
    g3 = math.fsum(profile.lambda1)
    g1 = math.fsum(profile.lambda1 + tuple(lam2[j] for j, a in enumerate(assignment) if a == Network.WIFI))
    g2 = math.fsum(lam2[j] for j, a in enumerate(assignment) if a == Network.LAA)
    g4 = math.fsum(profile.lambda1 + lam2)
    return Aggregates(g1=g1, g2=g2, g3=g3, g4=g4, z=math.exp(-g1))


def _check_beta(beta: float, cfg: ProtocolConfig) -> None:
    if not 0.0 <= beta <= cfg.theta:
        raise DomainError(f"beta={beta} outside [0, theta={cfg.theta}]")


def wifi_channel_periods(agg: Aggregates, beta: float, cfg: ProtocolConfig) -> tuple[float, float, float]:
    """Expected busy, useful (non-collision) and idle WiFi channel periods.

    Returns ``(busy, useful, idle)``. Powers of ``z = exp(-g1)`` and ``1 - z``
    are taken in log space so that non-integer ``gamma`` and very small
    ``sigma`` stay accurate.
    """
    g1 = agg.g1
    if g1 <= 0:
        raise DegenerateTrafficError("WiFi channel periods need positive WiFi traffic")
    theta, sigma = cfg.theta, cfg.sigma
    gamma = theta - beta
    if not gamma > 0:
        raise DomainError(f"WiFi share gamma = theta - beta must be positive, got {gamma}")

    ln_z = -g1
    z = math.exp(ln_z)
    ln_1mz = math.log(-math.expm1(ln_z))  # log(1 - z)
    q = math.exp(gamma * ln_1mz)  # (1 - z)^gamma
    one_m_q = -math.expm1(gamma * ln_1mz)
    pow_1mz_gm1 = math.exp((gamma - 1.0) * ln_1mz)  # (1 - z)^(gamma - 1)

    busy = (
        1.0 / z
        + beta * beta / (2.0 * theta) * (1.0 + q) / one_m_q
        + (sigma * gamma * z + 2.0 * beta + (1.0 - sigma) * math.exp(gamma * ln_z)) / (2.0 * theta * z)
    )

    useful = (
        g1 * pow_1mz_gm1 * math.exp((1.0 + beta) * ln_z) * (1.0 / z + beta / one_m_q) * (1.0 + gamma)
        + g1 * (theta - 1.0 - pow_1mz_gm1 * z * beta / one_m_q)
        + (-math.expm1((1.0 + beta) * ln_z)) / g1
        + one_m_q * math.exp(beta * ln_z) * (-z + (1.0 - z) * (1.0 + 1.0 / g1 + beta))
        - math.expm1(sigma * ln_z) * (gamma - 1.0) / (g1 * sigma)
    ) / theta

    return busy, useful, 1.0 / g1


def _clamp_unit(value: float, what: str) -> float:
    if value < -CLAMP_WARN_TOL or value > 1.0 + CLAMP_WARN_TOL:
        logger.warning("model consistency: %s = %.9g outside [0, 1] before clamping", what, value)
    return min(1.0, max(0.0, value))


def wifi_throughput(agg: Aggregates, beta: float, cfg: ProtocolConfig) -> float:
    _check_beta(beta, cfg)
    if beta == cfg.theta or agg.g1 <= 0:
        return 0.0
    busy, useful, idle = wifi_channel_periods(agg, beta, cfg)
    return _clamp_unit(useful / (busy + idle), "R_W")


def laa_throughput(agg: Aggregates, beta: float, cfg: ProtocolConfig) -> float:
    _check_beta(beta, cfg)
    return min(beta / cfg.theta, agg.g2)


def pure_wifi_throughput(g4: float) -> float:
    """Throughput of 1-persistent CSMA carrying the whole load ``g4``."""
    if g4 < 0:
        raise DomainError(f"total traffic must be non-negative, got {g4}")
    if g4 == 0:
        return 0.0
    e = math.exp(-g4)
    return g4 * (1.0 + g4) * e / (g4 + e)


def iu_threshold(g4: float) -> float:
    """Per-unit-load WiFi throughput the incumbents get with no LAA at all (R0/G4)."""
    if g4 == 0:
        return 1.0  # limit of R0/G4 as G4 -> 0
    return pure_wifi_throughput(g4) / g4


def throughput(profile: TrafficProfile, assignment: Sequence[int], beta: float, cfg: ProtocolConfig) -> ThroughputBreakdown:
    agg = aggregates(profile, assignment)
    return ThroughputBreakdown(wifi_throughput(agg, beta, cfg), laa_throughput(agg, beta, cfg))


def _flags(agg: Aggregates, r_wifi: float, r_laa: float) -> tuple[bool, bool]:
    ratio = iu_threshold(agg.g4)
    iu_ok = True if agg.g3 == 0 else r_wifi / agg.g1 >= ratio
    su_ok = True if agg.g2 == 0 else r_laa >= agg.g2 * ratio
    return iu_ok, su_ok


def constraints_satisfied(
    profile: TrafficProfile, assignment: Sequence[int], beta: float, cfg: ProtocolConfig
) -> tuple[bool, bool]:
    """``(iu_protected, su_incentivized)`` for the given access pattern and beta."""
    agg = aggregates(profile, assignment)
    return _flags(agg, wifi_throughput(agg, beta, cfg), laa_throughput(agg, beta, cfg))


def utility(profile: TrafficProfile, assignment: Sequence[int], beta: float, cfg: ProtocolConfig) -> float:
    """Common payoff: total unlicensed throughput, or 0 if a fairness constraint fails."""
    agg = aggregates(profile, assignment)
    return _utility_from(agg, beta, cfg)


def _utility_from(agg: Aggregates, beta: float, cfg: ProtocolConfig) -> float:
    r_wifi = wifi_throughput(agg, beta, cfg)
    r_laa = laa_throughput(agg, beta, cfg)
    iu_ok, su_ok = _flags(agg, r_wifi, r_laa)
    if not (iu_ok and su_ok):
        return 0.0
    return _clamp_unit(r_wifi + r_laa, "R_t")


def count_unimodality_violations(values: Sequence[float], tol: float = 1e-9) -> int:
    """Number of extra direction changes in a sampled curve beyond one peak.

    First differences within ``tol`` count as flat. A unimodal sequence
    (rise, then fall) returns 0.
    """
    signs = []
    for a, b in zip(values, values[1:]):
        d = b - a
        if abs(d) > tol:
            s = 1 if d > 0 else -1
            if not signs or signs[-1] != s:
                signs.append(s)
    if signs and signs[0] == -1:
        signs = signs[1:]
    violations = max(0, len(signs) - 2)
    if violations:
        logger.info("R_t(beta) not unimodal on grid: %d extra direction changes", violations)
    return violations


class CoexistenceGame:
    """Utility evaluator bound to one traffic profile, with memoization.

    The learning loops query the same few hundred joint actions many
    thousand times; results are cached per ``(assignment, beta)``.
    """

    def __init__(self, profile: TrafficProfile, cfg: ProtocolConfig):
        self.profile = profile
        self.cfg = cfg
        self.n_su = profile.n_su
        self.g3 = math.fsum(profile.lambda1)
        self.g4 = math.fsum(profile.lambda1 + profile.lambda2)
        self._cache: dict = {}
        self._rw_cache: dict = {}

    def aggregates(self, assignment: Sequence[int]) -> Aggregates:
        return aggregates(self.profile, assignment)

    def wifi_throughput_at(self, g1: float, beta: float) -> float:
        key = (g1, beta)
        rw = self._rw_cache.get(key)
        if rw is None:
            agg = Aggregates(g1=g1, g2=0.0, g3=self.g3, g4=self.g4, z=math.exp(-g1))
            rw = self._rw_cache[key] = wifi_throughput(agg, beta, self.cfg)
        return rw

    def utility(self, assignment: Sequence[int], beta: float) -> float:
        key = (tuple(assignment), beta)
        u = self._cache.get(key)
        if u is None:
            u = self._cache[key] = utility(self.profile, assignment, beta, self.cfg)
        return u
