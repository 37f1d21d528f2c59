"""Scenario files: YAML documents describing one experiment.

Protocol timing may be given either normalized (``theta``, ``sigma``) or in
physical units (``packet_time``, ``frame_duration``, ``mini_slot`` as strings
such as ``"10 ms"`` or ``"20 us"``); physical values are normalized by the
packet time at load. Serialization always writes the normalized form.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

import yaml

from .allocator import AllocatorConfig
from .dna import SLConfig
from .errors import LaaCoexError, ScenarioParseError, ScenarioValueError
from .model import ProtocolConfig, TrafficProfile

_UNITS = {"s": 1.0, "ms": 1e-3, "us": 1e-6, "µs": 1e-6, "μs": 1e-6, "ns": 1e-9}
_QUANTITY = re.compile(r"^\s*([0-9.eE+-]+)\s*([a-zµμ]+)\s*$")


@dataclass(frozen=True)
class Phase:
    duration: int
    profile: TrafficProfile


@dataclass(frozen=True)
class Scenario:
    protocol: ProtocolConfig
    phases: tuple
    sl: SLConfig = field(default_factory=SLConfig)
    allocator: AllocatorConfig = field(default_factory=AllocatorConfig)
    fixed_beta: Optional[float] = None
    seed: int = 0
    name: str = "scenario"

    def __post_init__(self):
        if not self.phases:
            raise ScenarioValueError("a scenario needs at least one phase", field="phases")
        if self.fixed_beta is not None and not 0 <= self.fixed_beta <= self.protocol.theta:
            raise ScenarioValueError(f"fixed_beta={self.fixed_beta} outside [0, theta]", field="fixed_beta")

    @property
    def schedule(self) -> list:
        return [(p.duration, p.profile) for p in self.phases]

    def to_dict(self) -> dict:
        sl_kappa = list(self.sl.kappa) if isinstance(self.sl.kappa, tuple) else self.sl.kappa
        return {
            "name": self.name,
            "seed": self.seed,
            "protocol": {
                "theta": self.protocol.theta,
                "sigma": self.protocol.sigma,
                "beta_grid": list(self.protocol.beta_grid),
            },
            "fixed_beta": self.fixed_beta,
            "sl": {"kappa": sl_kappa, "epsilon": self.sl.epsilon, "n_max": self.sl.n_max},
            "allocator": {
                "omega": self.allocator.omega,
                "alpha": self.allocator.alpha,
                "delta": self.allocator.delta,
            },
            "phases": [
                {
                    "duration": p.duration,
                    "lambda1": list(p.profile.lambda1),
                    "lambda2": list(p.profile.lambda2),
                }
                for p in self.phases
            ],
        }

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def dump_scenario(scenario: Scenario) -> str:
    return yaml.safe_dump(scenario.to_dict(), sort_keys=False)


def save_scenario(scenario: Scenario, path) -> None:
    Path(path).write_text(dump_scenario(scenario))


def builtin_scenarios() -> list:
    return sorted(p.name[:-5] for p in resources.files("laacoex.scenarios").iterdir() if p.name.endswith(".yaml"))


def load_scenario(path) -> Scenario:
    """Load a scenario from a file path or a shipped scenario name (``table1``, ``fig5``)."""
    p = Path(path)
    if not p.exists() and str(path) in builtin_scenarios():
        text = resources.files("laacoex.scenarios").joinpath(f"{path}.yaml").read_text()
        return parse_scenario(text, source=str(path))
    try:
        text = p.read_text()
    except FileNotFoundError:
        raise ScenarioParseError(f"scenario file not found: {path}") from None
    return parse_scenario(text, source=str(path))


def parse_scenario(text: str, source: str = "<string>") -> Scenario:
    try:
        root = yaml.compose(text)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        raise ScenarioParseError(f"{source}: invalid YAML: {getattr(exc, 'problem', exc)}", line=line) from None
    if not isinstance(data, dict):
        raise ScenarioParseError(f"{source}: top level must be a mapping")
    lines = _line_map(root)
    return _Builder(data, lines, source).build()


def _line_map(node, path=()) -> dict:
    """Key path -> 1-based source line for every node of a composed YAML tree."""
    out = {}
    if node is None:
        return out
    out[path] = node.start_mark.line + 1
    if isinstance(node, yaml.MappingNode):
        for k, v in node.value:
            out.update(_line_map(v, path + (k.value,)))
    elif isinstance(node, yaml.SequenceNode):
        for i, v in enumerate(node.value):
            out.update(_line_map(v, path + (i,)))
    return out


def parse_duration(value, name: str = "value") -> float:
    """Seconds from ``"10 ms"``-style strings or plain numbers (already seconds)."""
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    m = _QUANTITY.match(str(value))
    if not m or m.group(2) not in _UNITS:
        raise ValueError(f"cannot read {name}={value!r} as a duration (use s, ms, us or ns)")
    return float(m.group(1)) * _UNITS[m.group(2)]


class _Builder:
    def __init__(self, data: dict, lines: dict, source: str):
        self.data = data
        self.lines = lines
        self.source = source

    def fail(self, path: tuple, message: str, parse: bool = False):
        name = ".".join(str(p) for p in path)
        line = None
        for k in range(len(path), -1, -1):
            if path[:k] in self.lines:
                line = self.lines[path[:k]]
                break
        cls = ScenarioParseError if parse else ScenarioValueError
        raise cls(f"{self.source}: {message}", field=name or None, line=line)

    def get(self, mapping: dict, path: tuple, key: str, default=...):
        if not isinstance(mapping, dict):
            self.fail(path, "expected a mapping", parse=True)
        if key not in mapping:
            if default is ...:
                self.fail(path + (key,), "missing required key", parse=True)
            return default
        return mapping[key]

    def number(self, value, path: tuple, kind=float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            self.fail(path, f"expected a number, got {value!r}", parse=True)
        if kind is int and int(value) != value:
            self.fail(path, f"expected an integer, got {value!r}")
        return kind(value)

    def build(self) -> Scenario:
        d = self.data
        known = {"name", "seed", "protocol", "fixed_beta", "sl", "allocator", "phases"}
        for key in d:
            if key not in known:
                self.fail((key,), "unknown key", parse=True)
        protocol = self.protocol(self.get(d, (), "protocol"))
        sl = self.sl(self.get(d, (), "sl", {}) or {})
        allocator = self.allocator(self.get(d, (), "allocator", {}) or {})
        phases = self.phases(self.get(d, (), "phases"))
        fixed = self.get(d, (), "fixed_beta", None)
        if fixed is not None:
            fixed = self.number(fixed, ("fixed_beta",))
        seed = self.number(self.get(d, (), "seed", 0), ("seed",), int)
        name = str(self.get(d, (), "name", "scenario"))
        try:
            return Scenario(protocol, phases, sl, allocator, fixed, seed, name)
        except ScenarioParseError:
            raise
        except LaaCoexError as exc:
            self.fail(("fixed_beta",), str(exc))

    def protocol(self, p) -> ProtocolConfig:
        path = ("protocol",)
        if not isinstance(p, dict):
            self.fail(path, "expected a mapping", parse=True)
        physical = {"packet_time", "frame_duration", "mini_slot"}
        normalized = {"theta", "sigma"}
        for key in p:
            if key not in physical | normalized | {"beta_grid"}:
                self.fail(path + (key,), "unknown key", parse=True)
        if physical & set(p):
            if normalized & set(p):
                self.fail(path, "give either theta/sigma or physical durations, not both", parse=True)
            secs = {}
            for key in sorted(physical):
                try:
                    secs[key] = parse_duration(self.get(p, path, key), key)
                except ValueError as exc:
                    self.fail(path + (key,), str(exc), parse=True)
                if not secs[key] > 0:
                    self.fail(path + (key,), f"{key} must be positive")
            theta = secs["frame_duration"] / secs["packet_time"]
            sigma = secs["mini_slot"] / secs["packet_time"]
            theta, sigma = round(theta, 12), round(sigma, 12)
        else:
            theta = self.number(self.get(p, path, "theta"), path + ("theta",))
            sigma = self.number(self.get(p, path, "sigma"), path + ("sigma",))
        grid = self.grid(p.get("beta_grid"), path + ("beta_grid",))
        try:
            return ProtocolConfig(theta=theta, sigma=sigma, **({} if grid is None else {"beta_grid": grid}))
        except LaaCoexError as exc:
            self.fail(path, str(exc))

    def grid(self, g, path):
        if g is None:
            return None
        if isinstance(g, dict):
            start = self.number(self.get(g, path, "start"), path + ("start",))
            stop = self.number(self.get(g, path, "stop"), path + ("stop",))
            step = self.number(self.get(g, path, "step"), path + ("step",))
            if not step > 0 or stop < start:
                self.fail(path, "grid needs step > 0 and stop >= start")
            n = int(round((stop - start) / step))
            return tuple(round(start + i * step, 10) for i in range(n + 1))
        if isinstance(g, list):
            return tuple(self.number(v, path + (i,)) for i, v in enumerate(g))
        self.fail(path, "beta_grid must be a list or a {start, stop, step} mapping", parse=True)

    def sl(self, s) -> SLConfig:
        path = ("sl",)
        kappa = self.get(s, path, "kappa", SLConfig.kappa)
        if isinstance(kappa, list):
            kappa = tuple(self.number(v, path + ("kappa", i)) for i, v in enumerate(kappa))
        else:
            kappa = self.number(kappa, path + ("kappa",))
        eps = self.number(self.get(s, path, "epsilon", SLConfig.epsilon), path + ("epsilon",))
        n_max = self.number(self.get(s, path, "n_max", SLConfig.n_max), path + ("n_max",), int)
        try:
            return SLConfig(kappa=kappa, epsilon=eps, n_max=n_max)
        except LaaCoexError as exc:
            self.fail(path, str(exc))

    def allocator(self, a) -> AllocatorConfig:
        path = ("allocator",)
        kwargs = {}
        for key, kind in (("omega", float), ("alpha", float), ("delta", int)):
            if key in a:
                kwargs[key] = self.number(a[key], path + (key,), kind)
        try:
            return AllocatorConfig(**kwargs)
        except LaaCoexError as exc:
            self.fail(path, str(exc))

    def phases(self, phases) -> tuple:
        path = ("phases",)
        if not isinstance(phases, list) or not phases:
            self.fail(path, "expected a non-empty list of phases", parse=True)
        out = []
        for i, ph in enumerate(phases):
            here = path + (i,)
            duration = self.number(self.get(ph, here, "duration", 1), here + ("duration",), int)
            if duration < 1:
                self.fail(here + ("duration",), "duration must be >= 1")
            rates = {}
            for key in ("lambda1", "lambda2"):
                values = self.get(ph, here, key, [])
                if values is None:
                    values = []
                if not isinstance(values, list):
                    self.fail(here + (key,), "expected a list of rates", parse=True)
                rates[key] = []
                for k, v in enumerate(values):
                    v = self.number(v, here + (key, k))
                    if not v > 0:
                        self.fail(here + (key, k), f"arrival rate must be positive, got {v}")
                    rates[key].append(v)
            out.append(Phase(duration, TrafficProfile(tuple(rates["lambda1"]), tuple(rates["lambda2"]))))
        return tuple(out)
