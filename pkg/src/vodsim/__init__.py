"""Blocking analysis for a partitioned video-on-demand server.

Analytic Erlang-B style formulas, a seeded multirate Poisson workload
generator, an event-driven loss-system simulator with pluggable admission
strategies, and a sweep/report CLI.
"""

from .analytic import (
    ChainSpec,
    OfferedLoad,
    PartitionSpec,
    PolicyWeights,
    chain_blocking,
    erlang_b,
    erlang_b_direct,
    erlang_k_pdf,
    free_port_selection_prob,
    policy_admission_prob,
)
from .config import ScenarioConfig, load_config, parse_config
from .engine import (
    AdmissionOutcome,
    ClusterState,
    Event,
    StrategySpec,
    admit,
    effective_gate,
    release,
    run,
)
from .errors import ConfigurationError, InternalConsistencyError, UndefinedMetricError
from .metrics import (
    ClassCounts,
    RunMetrics,
    SweepPoint,
    aggregate,
    blocking_probability,
    policed_fraction,
    to_csv,
)
from .traffic import (
    ClusterSpec,
    SessionRequest,
    WorkloadSpec,
    build_clusters,
    build_workload,
    merged_arrival_stream,
    next_interarrival,
    request_rate,
    sample_holding,
    scale_workload,
)
from .cli import AnalyticComparison, compare_analytic, run_scenario, run_sweep

__version__ = "0.1.0"
