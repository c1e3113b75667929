"""Event-driven simulation of the partitioned loss server.

Requests from the merged arrival stream probe the server's partitions for a
free port; blocked and policed requests leave the system (blocked calls
cleared, no retry). Admission strategies are pluggable: ``uncontrolled``
probes immediately, ``policy`` first passes a per-class Bernoulli gate.

A probe starts at the class's home partition (class_id mod k) and proceeds
cyclically, landing on the first partition with a free port. Events at
equal timestamps are ordered departure-first, then by insertion sequence,
so a port freed "now" is available to an arrival "now".

A run is strictly single-threaded and a pure function of its arguments;
independent runs share no state and may execute concurrently.
"""

from __future__ import annotations

import heapq
import random
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Optional, Sequence

from .analytic import PolicyWeights
from .errors import ConfigurationError, InternalConsistencyError
from .metrics import ClassCounts, RunMetrics
from .traffic import SessionRequest, WorkloadSpec, merged_arrival_stream

UNCONTROLLED = "uncontrolled"
POLICY = "policy"
MODES = (UNCONTROLLED, POLICY)

LITERAL = "literal"
MAX_NORMALIZED = "max_normalized"
SCALINGS = (LITERAL, MAX_NORMALIZED)

DEPARTURE = 0
ARRIVAL = 1

# XORed into the run seed for the gate generator, so policy coin flips are
# decorrelated from the arrival stream drawn under the same seed.
_GATE_SEED_MIX = 0x9E3779B97F4A7C15


class Event(NamedTuple):
    """One entry of the event queue; orders by (time, kind, seq).

    Departures carry the freed partition and the departing class;
    arrivals carry the request. kind makes simultaneous departures sort
    before simultaneous arrivals, seq keeps insertion (FIFO) order within
    a kind. seq is unique, so comparison never reaches the payload.
    """

    time: float
    kind: int
    seq: int
    partition: int = -1
    class_id: int = -1
    request: Optional[SessionRequest] = None


@dataclass(slots=True)
class ClusterState:
    """Live occupancy of the k partitions."""

    capacities: tuple[int, ...]
    occupied: list[int] = None  # type: ignore[assignment]
    free_ports: int = 0

    def __post_init__(self) -> None:
        self.capacities = tuple(self.capacities)
        if len(self.capacities) < 1:
            raise ValueError("at least one partition is required")
        for j, c in enumerate(self.capacities):
            if not isinstance(c, int) or isinstance(c, bool) or c < 0:
                raise ValueError(f"capacity[{j}] must be a non-negative integer, got {c!r}")
        if self.occupied is None:
            self.occupied = [0] * len(self.capacities)
        else:
            self.occupied = list(self.occupied)
            if len(self.occupied) != len(self.capacities):
                raise ValueError("occupied and capacities must have equal length")
            for j, (q, c) in enumerate(zip(self.occupied, self.capacities)):
                if not isinstance(q, int) or q < 0 or q > c:
                    raise ValueError(f"occupied[{j}] = {q!r} outside 0..{c}")
        self.free_ports = sum(self.capacities) - sum(self.occupied)


@dataclass(frozen=True, slots=True)
class AdmissionOutcome:
    """Result of one admission decision.

    kind is admitted, policed, or blocked; partition names the partition
    that accepted the request and is set exactly when kind is admitted.
    """

    kind: str
    partition: int | None = None

    def __post_init__(self) -> None:
        if (self.kind == "admitted") != (self.partition is not None):
            raise ValueError("partition must be set exactly for admitted outcomes")


POLICED = AdmissionOutcome("policed")
BLOCKED = AdmissionOutcome("blocked")


def effective_gate(weights: PolicyWeights, class_id: int, scaling: str = LITERAL) -> float:
    """Gate probability for a class: its weight, literal or max-normalized.

    literal uses the weight as given (weights sum to 1, so with many
    classes every gate is small). max_normalized divides by the largest
    weight: the highest-priority class passes with probability 1 and the
    others keep their relative priorities.
    """
    if scaling not in SCALINGS:
        raise ValueError(f"scaling must be one of {SCALINGS}, got {scaling!r}")
    if not 0 <= class_id < len(weights):
        raise ValueError(f"class_id {class_id} outside 0..{len(weights) - 1}")
    w = weights[class_id]
    if scaling == LITERAL:
        return w
    return w / max(weights.weights)


@dataclass(frozen=True)
class StrategySpec:
    """Admission strategy: uncontrolled overflow, or a per-class policy gate."""

    mode: str
    weights: PolicyWeights | None = None
    weight_scaling: str = LITERAL
    _gates: tuple[float, ...] | None = field(
        init=False, repr=False, compare=False, default=None
    )

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ConfigurationError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.weight_scaling not in SCALINGS:
            raise ConfigurationError(
                f"weight_scaling must be one of {SCALINGS}, got {self.weight_scaling!r}"
            )
        if (self.mode == POLICY) != (self.weights is not None):
            raise ConfigurationError("weights must be supplied iff mode is 'policy'")
        if self.weights is not None:
            gates = tuple(
                effective_gate(self.weights, c, self.weight_scaling)
                for c in range(len(self.weights))
            )
            object.__setattr__(self, "_gates", gates)

    def gate_for(self, class_id: int) -> float:
        """Precomputed effective gate for a class (policy mode only)."""
        if self._gates is None:
            raise ConfigurationError("gate_for is only defined for policy strategies")
        if not 0 <= class_id < len(self._gates):
            raise ValueError(f"class_id {class_id} outside 0..{len(self._gates) - 1}")
        return self._gates[class_id]


UNCONTROLLED_STRATEGY = StrategySpec(UNCONTROLLED)


def admit(
    state: ClusterState,
    request: SessionRequest,
    strategy: StrategySpec,
    rng: random.Random,
) -> AdmissionOutcome:
    """Decide one request: gate it (policy mode), then probe for a free port.

    The probe starts at home = class_id mod k and walks the partitions
    cyclically; the request is admitted at the first partition with a free
    port (its occupancy incremented), and blocked if all k are full. A
    policed request never touches the state and consumes exactly one draw
    from the gate generator.
    """
    if strategy.mode == POLICY:
        gates = strategy._gates
        if gates is None:
            raise ConfigurationError("policy strategy has no weights")
        try:
            gate = gates[request.class_id]
        except IndexError:
            raise ValueError(
                f"class_id {request.class_id} outside 0..{len(gates) - 1}"
            ) from None
        if rng.random() >= gate:
            return POLICED

    if state.free_ports == 0:
        return BLOCKED
    capacities = state.capacities
    occupied = state.occupied
    k = len(capacities)
    home = request.class_id % k
    for step in range(k):
        j = home + step
        if j >= k:
            j -= k
        if occupied[j] < capacities[j]:
            occupied[j] += 1
            state.free_ports -= 1
            return AdmissionOutcome("admitted", j)
    raise InternalConsistencyError(
        f"free_ports={state.free_ports} but every partition probe failed"
    )


def release(state: ClusterState, partition_index: int) -> ClusterState:
    """Free one port in the given partition (a session departed). Mutates state."""
    if not 0 <= partition_index < len(state.occupied):
        raise ValueError(
            f"partition_index {partition_index} outside 0..{len(state.occupied) - 1}"
        )
    if state.occupied[partition_index] < 1:
        raise InternalConsistencyError(
            f"release on empty partition {partition_index}: departure without admission"
        )
    state.occupied[partition_index] -= 1
    state.free_ports += 1
    return state


def run(
    workload: WorkloadSpec,
    capacities: Sequence[int],
    strategy: StrategySpec,
    horizon: float,
    warmup: float,
    seed: int,
) -> RunMetrics:
    """Simulate the workload against the partitioned server, return counters.

    The seed drives everything: the arrival stream is regenerated from the
    workload with this seed substituted, and policy gate draws come from an
    independently derived generator, so uncontrolled and policy runs at the
    same seed see the same arrivals. Counters only include requests
    arriving at or after warmup; earlier requests still evolve the state.
    """
    if not 0 <= warmup < horizon:
        raise ValueError(f"warmup must lie in [0, horizon), got {warmup} vs {horizon}")
    if strategy.mode == POLICY and len(strategy.weights) < len(workload.clusters):
        raise ConfigurationError(
            f"policy weights cover {len(strategy.weights)} classes but the "
            f"workload has {len(workload.clusters)}"
        )
    state = ClusterState(tuple(capacities))
    stream = merged_arrival_stream(replace(workload, seed=seed), horizon)
    gate_rng = random.Random(seed ^ _GATE_SEED_MIX)

    num_classes = len(workload.clusters)
    offered = [0] * num_classes
    admitted = [0] * num_classes
    policed = [0] * num_classes
    blocked = [0] * num_classes

    departures: list[Event] = []
    push, pop = heapq.heappush, heapq.heappop
    seq = 0
    for req in stream:
        t = req.arrival_time
        while departures and departures[0][0] <= t:
            release(state, pop(departures).partition)
        cls = req.class_id
        counted = t >= warmup
        if counted:
            offered[cls] += 1
        outcome = admit(state, req, strategy, gate_rng)
        kind = outcome.kind
        if kind == "admitted":
            seq += 1
            push(
                departures,
                Event(t + req.holding_time, DEPARTURE, seq, outcome.partition, cls),
            )
            if counted:
                admitted[cls] += 1
            if __debug__:
                j = outcome.partition
                if not 0 <= state.occupied[j] <= state.capacities[j]:
                    raise InternalConsistencyError(
                        f"occupancy bound violated at partition {j}"
                    )
        elif counted:
            if kind == "policed":
                policed[cls] += 1
            else:
                blocked[cls] += 1

    while departures and departures[0][0] <= horizon:
        release(state, pop(departures).partition)
    if __debug__ and sum(state.occupied) != len(departures):
        raise InternalConsistencyError(
            "final occupancy inconsistent with outstanding departures"
        )

    per_class = tuple(
        ClassCounts(offered[c], admitted[c], policed[c], blocked[c])
        for c in range(num_classes)
    )
    return RunMetrics(
        offered=sum(offered),
        admitted=sum(admitted),
        policed=sum(policed),
        blocked=sum(blocked),
        per_class=per_class,
        horizon=horizon,
        warmup=warmup,
        seed=seed,
    )
