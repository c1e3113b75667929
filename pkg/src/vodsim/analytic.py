"""Closed-form blocking and admission probabilities for a partitioned loss server.

Pure functions only: no state, no randomness. Everything here is safe to
call concurrently. Probabilities are validated on the way in (construction)
and sanity-checked on the way out; an out-of-range result raises
``InternalConsistencyError`` instead of being clamped, so formula bugs
surface instead of hiding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Union

from .errors import InternalConsistencyError

# erlang_b_direct is only supported where every factorial in the sum fits a
# double (170! is the largest); beyond that the recurrence must be used.
_DIRECT_CAPACITY_LIMIT = 170


@dataclass(frozen=True)
class OfferedLoad:
    """Offered traffic in Erlangs (arrival rate times mean holding time)."""

    erlangs: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.erlangs):
            raise ValueError(f"offered load must be finite, got {self.erlangs}")
        if self.erlangs < 0:
            raise ValueError(f"offered load must be >= 0, got {self.erlangs}")


@dataclass(frozen=True)
class PartitionSpec:
    """Capacity of one server partition, in ports."""

    capacity: int

    def __post_init__(self) -> None:
        if not isinstance(self.capacity, int) or isinstance(self.capacity, bool):
            raise ValueError(f"capacity must be an integer, got {self.capacity!r}")
        if self.capacity < 0:
            raise ValueError(f"capacity must be >= 0, got {self.capacity}")


@dataclass(frozen=True)
class ChainSpec:
    """An ordered chain of partitions an overflowing request has traversed.

    Each stage is the (offered load, capacity) of one partition found fully
    occupied. The chain may be empty, in which case the blocking product is
    the empty product, 1.
    """

    stages: tuple[tuple[OfferedLoad, PartitionSpec], ...]

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[float, int]]) -> "ChainSpec":
        return cls(
            tuple((OfferedLoad(float(e)), PartitionSpec(int(c))) for e, c in pairs)
        )


@dataclass(frozen=True)
class PolicyWeights:
    """Per-class admission weights, one per request class, summing to 1."""

    weights: tuple[float, ...]

    #: absolute tolerance on the weight sum; config files carry decimal
    #: fractions, so exact equality is not required
    SUM_TOLERANCE = 1e-9

    def __post_init__(self) -> None:
        if not isinstance(self.weights, tuple):
            object.__setattr__(self, "weights", tuple(self.weights))
        if not self.weights:
            raise ValueError("at least one weight is required")
        for i, w in enumerate(self.weights):
            if not math.isfinite(w) or not 0.0 <= w <= 1.0:
                raise ValueError(f"weight[{i}] = {w} is outside [0, 1]")
        total = math.fsum(self.weights)
        if abs(total - 1.0) > self.SUM_TOLERANCE:
            raise ValueError(f"weights must sum to 1 (got {total!r})")

    def __len__(self) -> int:
        return len(self.weights)

    def __getitem__(self, class_id: int) -> float:
        return self.weights[class_id]


LoadLike = Union[OfferedLoad, float, int]
CapacityLike = Union[PartitionSpec, int]


def _as_erlangs(load: LoadLike) -> float:
    if isinstance(load, OfferedLoad):
        return load.erlangs
    return OfferedLoad(float(load)).erlangs


def _as_capacity(capacity: CapacityLike) -> int:
    if isinstance(capacity, PartitionSpec):
        return capacity.capacity
    return PartitionSpec(capacity).capacity


def _checked_probability(p: float, context: str) -> float:
    if not 0.0 <= p <= 1.0:
        raise InternalConsistencyError(f"{context} produced {p}, outside [0, 1]")
    return p


def erlang_b(load: LoadLike, capacity: CapacityLike) -> float:
    """Erlang-B blocking probability of an M/M/C/C loss system.

    B(E, C) = (E^C / C!) / sum_{k=0..C} (E^k / k!), evaluated through the
    numerically stable recurrence

        B(E, 0) = 1
        B(E, C) = E * B(E, C-1) / (C + E * B(E, C-1))

    which never forms a factorial. Strictly decreasing in C for E > 0 and
    nondecreasing in E for fixed C.
    """
    e = _as_erlangs(load)
    c = _as_capacity(capacity)
    b = 1.0
    for n in range(1, c + 1):
        b = e * b / (n + e * b)
    return _checked_probability(b, "erlang_b")


def erlang_b_direct(load: LoadLike, capacity: CapacityLike) -> float:
    """Erlang-B evaluated from the literal factorial sum.

    Kept as an independent oracle for :func:`erlang_b`; only valid for
    capacities up to 170 where the factorial still fits in a double.
    """
    e = _as_erlangs(load)
    c = _as_capacity(capacity)
    if c > _DIRECT_CAPACITY_LIMIT:
        raise ValueError(
            f"capacity {c} exceeds the factorial guard "
            f"({_DIRECT_CAPACITY_LIMIT}); use erlang_b (recurrence form) instead"
        )
    terms = [1.0]  # e^0 / 0!
    for k in range(1, c + 1):
        terms.append(terms[-1] * e / k)
    denominator = math.fsum(terms)
    if not math.isfinite(denominator):
        raise ValueError(
            f"factorial-sum form overflowed at load {e}, capacity {c}; "
            "use erlang_b (recurrence form) instead"
        )
    return _checked_probability(terms[-1] / denominator, "erlang_b_direct")


def chain_blocking(chain: Union[ChainSpec, Iterable[tuple[float, int]]]) -> float:
    """Probability that every partition in the chain blocks simultaneously.

    The per-partition blocking events are treated as independent, so the
    result is the product of the per-stage Erlang-B values. An empty chain
    yields 1 (empty product).
    """
    if not isinstance(chain, ChainSpec):
        chain = ChainSpec.from_pairs(chain)
    p = 1.0
    for stage_load, stage_capacity in chain.stages:
        p *= erlang_b(stage_load, stage_capacity)
    return _checked_probability(p, "chain_blocking")


def free_port_selection_prob(
    k: int, j: int, capacity_j: CapacityLike, occupied_j: int
) -> float:
    """Probability that a request lands on partition j of k and finds a free port.

    Combines the geometric chance of reaching the j-th partition under
    memoryless uniform selection with the fraction of ports currently free
    there:

        (1 - 1/k)^(j-1) * (1/k) * (C_j - Q_j) / C_j

    Q_j is the instantaneous occupancy, supplied by the caller; this module
    never owns state.
    """
    if k < 1:
        raise ValueError(f"partition count k must be >= 1, got {k}")
    if not 1 <= j <= k:
        raise ValueError(f"partition index j must be in 1..{k}, got {j}")
    c = _as_capacity(capacity_j)
    if c == 0:
        raise ValueError("capacity_j must be >= 1 (free fraction divides by it)")
    if occupied_j < 0 or occupied_j > c:
        raise ValueError(f"occupied_j must be in 0..{c}, got {occupied_j}")
    p = (1.0 - 1.0 / k) ** (j - 1) * (1.0 / k) * ((c - occupied_j) / c)
    return _checked_probability(p, "free_port_selection_prob")


def policy_admission_prob(weight: float, base: float) -> float:
    """Admission probability after the per-class policy gate: weight * base."""
    for name, value in (("weight", weight), ("base", base)):
        if not math.isfinite(value) or not 0.0 <= value <= 1.0:
            raise ValueError(f"{name} must be a probability in [0, 1], got {value}")
    return _checked_probability(weight * base, "policy_admission_prob")


def erlang_k_pdf(k: int, rate: float, t: float) -> float:
    """Density of the sum of k iid exponential(rate) variables at time t.

    f(t) = rate^k * t^(k-1) * exp(-rate * t) / (k-1)!

    This is the distribution followed by the time until the k-th arrival of
    a Poisson stream, used to validate generated traffic.
    """
    if not isinstance(k, int) or k < 1:
        raise ValueError(f"shape k must be a positive integer, got {k!r}")
    if not math.isfinite(rate) or rate <= 0:
        raise ValueError(f"rate must be > 0, got {rate}")
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    if t == 0.0:
        return rate if k == 1 else 0.0
    log_f = k * math.log(rate) + (k - 1) * math.log(t) - rate * t - math.lgamma(k)
    f = math.exp(log_f)
    if not math.isfinite(f) or f < 0:
        raise InternalConsistencyError(f"erlang_k_pdf produced {f}")
    return f
