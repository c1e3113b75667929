"""Scenario configuration: defaults, the key=value file format, presets.

The default configuration is the reference scenario: 30 client clusters
offering 1.0 to 15.5 Mb/s, 30 server partitions, port access times of 1 to
200 s, and a 500 s simulation horizon. A config file overrides individual
keys; everything unspecified keeps its default.

Format: one ``key = value`` per line, ``#`` starts a comment, blank lines
ignored, unknown keys rejected with the offending line number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from pathlib import Path

from .analytic import PolicyWeights
from .engine import (
    LITERAL,
    MAX_NORMALIZED,
    POLICY,
    UNCONTROLLED,
    UNCONTROLLED_STRATEGY,
    StrategySpec,
)
from .errors import ConfigurationError
from .traffic import WorkloadSpec, build_workload

BOTH = "both"
STRATEGY_CHOICES = (UNCONTROLLED, POLICY, BOTH)
PRESET_UNIFORM = "uniform"
PRESET_CAPACITY = "capacity_proportional"
PRESET_CHOICES = (PRESET_UNIFORM, PRESET_CAPACITY)
SWEEP_GLOBAL = "global"
SWEEP_PER_CLUSTER = "per_cluster"
SWEEP_CHOICES = (SWEEP_GLOBAL, SWEEP_PER_CLUSTER)

_MAX_SEED = 2**64


@dataclass(frozen=True)
class ScenarioConfig:
    """One complete scenario; defaults are the reference parameters.

    warmup defaults to 10% of the horizon when not set explicitly.
    threshold only annotates reports (pass/fail per sweep point); it never
    changes simulation behavior.
    """

    num_clusters: int = 30
    min_rate: float = 1.0
    max_rate: float = 15.5
    per_stream_bandwidth: float = 100.0
    num_partitions: int = 30
    ports_per_partition: int = 10
    min_hold: float = 1.0
    max_hold: float = 200.0
    horizon: float = 500.0
    warmup: float | None = None
    replications: int = 20
    seed: int = 42
    strategy: str = BOTH
    policy_preset: str = PRESET_UNIFORM
    weight_scaling: str = LITERAL
    threshold: float = 0.05
    interactive_rate: float = 0.0
    sweep_mode: str = SWEEP_GLOBAL

    def __post_init__(self) -> None:
        if self.warmup is None:
            object.__setattr__(self, "warmup", 0.1 * self.horizon)
        checks = [
            (self.num_clusters >= 1, "num_clusters must be >= 1"),
            (self.num_partitions >= 1, "num_partitions must be >= 1"),
            (self.ports_per_partition >= 0, "ports_per_partition must be >= 0"),
            (self.replications >= 1, "replications must be >= 1"),
            (
                0 <= self.min_rate <= self.max_rate,
                f"rates must satisfy 0 <= min_rate <= max_rate, "
                f"got min_rate={self.min_rate} max_rate={self.max_rate}",
            ),
            (self.per_stream_bandwidth > 0, "per_stream_bandwidth must be > 0"),
            (
                0 < self.min_hold <= self.max_hold,
                f"hold times must satisfy 0 < min_hold <= max_hold, "
                f"got min_hold={self.min_hold} max_hold={self.max_hold}",
            ),
            (
                math.isfinite(self.horizon) and self.horizon > 0,
                "horizon must be > 0",
            ),
            (
                0 <= self.warmup < self.horizon,
                f"warmup must lie in [0, horizon), got warmup={self.warmup} "
                f"horizon={self.horizon}",
            ),
            (0 <= self.seed < _MAX_SEED, "seed must be an unsigned 64-bit integer"),
            (
                self.strategy in STRATEGY_CHOICES,
                f"strategy must be one of {STRATEGY_CHOICES}",
            ),
            (
                self.policy_preset in PRESET_CHOICES,
                f"policy_preset must be one of {PRESET_CHOICES}",
            ),
            (
                self.weight_scaling in (LITERAL, MAX_NORMALIZED),
                f"weight_scaling must be one of {(LITERAL, MAX_NORMALIZED)}",
            ),
            (0 <= self.threshold <= 1, "threshold must be a probability"),
            (self.interactive_rate >= 0, "interactive_rate must be >= 0"),
            (
                self.sweep_mode in SWEEP_CHOICES,
                f"sweep_mode must be one of {SWEEP_CHOICES}",
            ),
        ]
        for ok, message in checks:
            if not ok:
                raise ConfigurationError(message)

    def capacities(self) -> list[int]:
        """Equal ports per partition, as a per-partition capacity list."""
        return [self.ports_per_partition] * self.num_partitions

    def workload(self) -> WorkloadSpec:
        return build_workload(
            num_clusters=self.num_clusters,
            min_rate=self.min_rate,
            max_rate=self.max_rate,
            per_stream_bandwidth=self.per_stream_bandwidth,
            min_hold=self.min_hold,
            max_hold=self.max_hold,
            seed=self.seed,
            interactive_rate=self.interactive_rate,
        )

    def policy_weights(self) -> PolicyWeights:
        """Build the preset class weights.

        uniform gives every class 1/n. capacity_proportional weights class
        c by the capacity of its home partition (c mod k), normalized; with
        equal ports per partition the two presets coincide.
        """
        n = self.num_clusters
        if self.policy_preset == PRESET_UNIFORM:
            return PolicyWeights((1.0 / n,) * n)
        caps = self.capacities()
        raw = [caps[c % len(caps)] for c in range(n)]
        total = sum(raw)
        if total == 0:
            raise ConfigurationError(
                "capacity_proportional weights need at least one port"
            )
        return PolicyWeights(tuple(r / total for r in raw))

    def policy_strategy(self) -> StrategySpec:
        return StrategySpec(POLICY, self.policy_weights(), self.weight_scaling)

    def strategy_specs(self) -> list[tuple[str, StrategySpec]]:
        """Named strategies this scenario runs, uncontrolled first."""
        policy_name = f"policy-{self.policy_preset}-{self.weight_scaling}"
        specs: list[tuple[str, StrategySpec]] = []
        if self.strategy in (UNCONTROLLED, BOTH):
            specs.append((UNCONTROLLED, UNCONTROLLED_STRATEGY))
        if self.strategy in (POLICY, BOTH):
            specs.append((policy_name, self.policy_strategy()))
        return specs


def _choice(*allowed: str):
    def parse(value: str) -> str:
        if value not in allowed:
            raise ValueError(f"expected one of {allowed}")
        return value

    return parse


_PARSERS = {
    "num_clusters": int,
    "min_rate": float,
    "max_rate": float,
    "per_stream_bandwidth": float,
    "num_partitions": int,
    "ports_per_partition": int,
    "min_hold": float,
    "max_hold": float,
    "horizon": float,
    "warmup": float,
    "replications": int,
    "seed": int,
    "strategy": _choice(*STRATEGY_CHOICES),
    "policy_preset": _choice(*PRESET_CHOICES),
    "weight_scaling": _choice(LITERAL, MAX_NORMALIZED),
    "threshold": float,
    "interactive_rate": float,
    "sweep_mode": _choice(*SWEEP_CHOICES),
}

assert set(_PARSERS) == {f.name for f in fields(ScenarioConfig)}


def parse_config(text: str) -> ScenarioConfig:
    """Parse key=value configuration text; unset keys take the defaults."""
    values: dict = {}
    key_lines: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigurationError(
                f"line {lineno}: expected 'key = value', got {raw.strip()!r}"
            )
        key = key.strip()
        value = value.strip()
        if key not in _PARSERS:
            raise ConfigurationError(f"line {lineno}: unknown key {key!r}")
        if key in key_lines:
            raise ConfigurationError(
                f"line {lineno}: duplicate key {key!r} (first set at line {key_lines[key]})"
            )
        try:
            values[key] = _PARSERS[key](value)
        except ValueError as exc:
            raise ConfigurationError(
                f"line {lineno}: bad value for {key}: {value!r} ({exc})"
            ) from None
        key_lines[key] = lineno
    try:
        return ScenarioConfig(**values)
    except ConfigurationError as exc:
        involved = [
            f"{key} = {values[key]} (line {line})"
            for key, line in key_lines.items()
            if key in str(exc)
        ]
        detail = f" [{'; '.join(involved)}]" if involved else ""
        raise ConfigurationError(str(exc) + detail) from None


def load_config(path: str | Path) -> ScenarioConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from None
    return parse_config(text)
