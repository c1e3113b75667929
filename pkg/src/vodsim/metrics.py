"""Counters, blocking probabilities, replication statistics, CSV output.

Two blocking scopes are reported everywhere: ``server`` is the fraction of
requests that reached the partitions and found them all full, and
``total_denial`` additionally counts requests rejected by the policy gate.
A metric with a zero denominator raises ``UndefinedMetricError`` and is
serialized as an absent value, never as 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import UndefinedMetricError

SCOPES = ("server", "total_denial")

_CSV_HEADER = (
    "traffic_rate_mbps,offered_erlangs,strategy,replications,"
    "mean_server_blocking,ci95_server,mean_total_denial,ci95_total,"
    "mean_policed_fraction"
)

# 97.5th percentile of the standard normal; replication counts are small,
# so this is the usual large-sample approximation, not a t quantile.
_Z95 = 1.96


def _check_conservation(label, offered, admitted, policed, blocked):
    for name, v in (
        ("offered", offered),
        ("admitted", admitted),
        ("policed", policed),
        ("blocked", blocked),
    ):
        if not isinstance(v, int) or v < 0:
            raise ValueError(f"{label}: {name} must be a non-negative integer, got {v!r}")
    if offered != admitted + policed + blocked:
        raise ValueError(
            f"{label}: conservation violated: offered {offered} != "
            f"admitted {admitted} + policed {policed} + blocked {blocked}"
        )


@dataclass(frozen=True)
class ClassCounts:
    """Post-warmup request counts for one request class."""

    offered: int
    admitted: int
    policed: int
    blocked: int

    def __post_init__(self) -> None:
        _check_conservation("class counts", self.offered, self.admitted, self.policed, self.blocked)


@dataclass(frozen=True)
class RunMetrics:
    """Counters from one simulation run, totals plus a per-class breakdown."""

    offered: int
    admitted: int
    policed: int
    blocked: int
    per_class: tuple[ClassCounts, ...]
    horizon: float
    warmup: float
    seed: int

    def __post_init__(self) -> None:
        _check_conservation("totals", self.offered, self.admitted, self.policed, self.blocked)
        if not isinstance(self.per_class, tuple):
            object.__setattr__(self, "per_class", tuple(self.per_class))
        if self.per_class:
            for name in ("offered", "admitted", "policed", "blocked"):
                total = sum(getattr(c, name) for c in self.per_class)
                if total != getattr(self, name):
                    raise ValueError(
                        f"per-class {name} sums to {total}, totals say "
                        f"{getattr(self, name)}"
                    )
        if not 0 <= self.warmup < self.horizon:
            raise ValueError(
                f"warmup must lie in [0, horizon), got warmup={self.warmup} "
                f"horizon={self.horizon}"
            )


def blocking_probability(m, scope: str = "server") -> float:
    """Blocking probability of one run (or one class) under the given scope.

    server: blocked / (offered - policed), the loss seen by requests that
    passed the gate. total_denial: (blocked + policed) / offered, every
    way a request can be turned away.
    """
    if scope not in SCOPES:
        raise ValueError(f"scope must be one of {SCOPES}, got {scope!r}")
    if scope == "server":
        denominator = m.offered - m.policed
        numerator = m.blocked
    else:
        denominator = m.offered
        numerator = m.blocked + m.policed
    if denominator == 0:
        raise UndefinedMetricError(
            f"{scope} blocking undefined: zero denominator "
            f"(offered={m.offered}, policed={m.policed})"
        )
    return numerator / denominator


def policed_fraction(m) -> float:
    """Fraction of offered requests the policy gate rejected."""
    if m.offered == 0:
        raise UndefinedMetricError("policed fraction undefined: no offered requests")
    return m.policed / m.offered


def aggregate(replications: Sequence, scope: str = "server") -> tuple[float, float]:
    """Mean blocking over replications and a 95% normal-approximation halfwidth.

    A single replication yields a degenerate interval (halfwidth 0).
    """
    if len(replications) == 0:
        raise ValueError("aggregate requires at least one replication")
    values = [blocking_probability(m, scope) for m in replications]
    return _mean_and_halfwidth(values)


def _mean_and_halfwidth(values: Sequence[float]) -> tuple[float, float]:
    n = len(values)
    mean = math.fsum(values) / n
    if n < 2:
        return mean, 0.0
    variance = math.fsum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, _Z95 * math.sqrt(variance) / math.sqrt(n)


@dataclass(frozen=True)
class SweepPoint:
    """Aggregated result of one (traffic rate, strategy) sweep cell.

    mean_blocking and ci95_halfwidth are server-scope; both are None when
    the metric was undefined in some replication. The raw replications are
    kept so other scopes can be derived.
    """

    traffic_rate: float
    offered_erlangs: float
    strategy: str
    replications: tuple[RunMetrics, ...]
    mean_blocking: float | None
    ci95_halfwidth: float | None

    def __post_init__(self) -> None:
        if not isinstance(self.replications, tuple):
            object.__setattr__(self, "replications", tuple(self.replications))
        if (self.mean_blocking is None) != (self.ci95_halfwidth is None):
            raise ValueError("mean_blocking and ci95_halfwidth must be absent together")
        if self.mean_blocking is not None:
            if not 0.0 <= self.mean_blocking <= 1.0:
                raise ValueError(f"mean_blocking {self.mean_blocking} outside [0, 1]")
            if self.ci95_halfwidth < 0.0:
                raise ValueError(f"ci95_halfwidth {self.ci95_halfwidth} negative")

    @classmethod
    def from_replications(
        cls,
        traffic_rate: float,
        offered_erlangs: float,
        strategy: str,
        replications: Iterable[RunMetrics],
    ) -> "SweepPoint":
        replications = tuple(replications)
        try:
            mean, halfwidth = aggregate(replications, "server")
        except UndefinedMetricError:
            mean, halfwidth = None, None
        return cls(traffic_rate, offered_erlangs, strategy, replications, mean, halfwidth)


def _fmt(value: float | None) -> str:
    if value is None:
        return ""
    return f"{value:.12g}"


def _safe_stats(replications, metric) -> tuple[float | None, float | None]:
    try:
        return _mean_and_halfwidth([metric(m) for m in replications])
    except UndefinedMetricError:
        return None, None


def to_csv(points: Iterable[SweepPoint]) -> str:
    """Serialize sweep points to CSV, deterministically.

    One row per point, ordered by ascending traffic rate then strategy
    name. Numbers use shortest-form 12-significant-digit formatting, so
    identical inputs always produce byte-identical output.
    """
    lines = [_CSV_HEADER]
    for p in sorted(points, key=lambda p: (p.traffic_rate, p.strategy)):
        total_mean, total_hw = _safe_stats(
            p.replications, lambda m: blocking_probability(m, "total_denial")
        )
        policed_mean, _ = _safe_stats(p.replications, policed_fraction)
        lines.append(
            ",".join(
                (
                    _fmt(p.traffic_rate),
                    _fmt(p.offered_erlangs),
                    p.strategy,
                    str(len(p.replications)),
                    _fmt(p.mean_blocking),
                    _fmt(p.ci95_halfwidth),
                    _fmt(total_mean),
                    _fmt(total_hw),
                    _fmt(policed_mean),
                )
            )
        )
    return "\n".join(lines) + "\n"
