"""Command-line interface: run a scenario, sweep the load range, or check
the simulator against the closed-form blocking value.

Commands
    vodsim run --config PATH [--seed N] [--strategy uncontrolled|policy|both] [--out PATH]
    vodsim sweep --config PATH --out PATH
    vodsim compare-analytic --config PATH --tolerance X

Human-readable summaries go to stdout, errors to stderr, CSV to --out.
Exit codes: 0 success, 2 configuration error, 3 internal consistency error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, replace
from pathlib import Path

from .analytic import erlang_b
from .config import (
    BOTH,
    SWEEP_PER_CLUSTER,
    ScenarioConfig,
    load_config,
)
from .engine import POLICY, UNCONTROLLED, UNCONTROLLED_STRATEGY, run
from .errors import ConfigurationError, InternalConsistencyError, UndefinedMetricError
from .metrics import RunMetrics, SweepPoint, aggregate, to_csv
from .traffic import scale_workload

# Spreads replication seeds of different sweep points apart; the offset is
# part of the reproducibility contract, so treat it as frozen.
_POINT_SEED_STRIDE = 10007


def _replication_seeds(config: ScenarioConfig, point_index: int) -> list[int]:
    return [
        config.seed + point_index * _POINT_SEED_STRIDE + r
        for r in range(config.replications)
    ]


def _restrict_to_class(m: RunMetrics, class_id: int) -> RunMetrics:
    """View one class of a run as a standalone set of counters."""
    c = m.per_class[class_id]
    return RunMetrics(
        offered=c.offered,
        admitted=c.admitted,
        policed=c.policed,
        blocked=c.blocked,
        per_class=(c,),
        horizon=m.horizon,
        warmup=m.warmup,
        seed=m.seed,
    )


def run_sweep(config: ScenarioConfig) -> list[SweepPoint]:
    """Simulate every sweep point for every configured strategy.

    In global mode (the default) sweep point c scales every cluster's
    arrival rate by traffic_rate_c / min_rate, so the sweep traces system
    blocking against total offered load. In per_cluster mode the load is
    fixed at the base scenario and each point reports one cluster's own
    blocking. Replication seeds are seed + point_index * 10007 + r, so
    matched points across strategies see identical arrivals.
    """
    base = config.workload()
    capacities = config.capacities()
    strategies = config.strategy_specs()

    if config.sweep_mode == SWEEP_PER_CLUSTER:
        offered_total = base.offered_erlangs()
        seeds = _replication_seeds(config, 0)
        points = []
        for name, strategy in strategies:
            replications = tuple(
                run(base, capacities, strategy, config.horizon, config.warmup, s)
                for s in seeds
            )
            for cluster in base.clusters:
                points.append(
                    SweepPoint.from_replications(
                        cluster.traffic_rate,
                        offered_total,
                        name,
                        tuple(
                            _restrict_to_class(m, cluster.class_id)
                            for m in replications
                        ),
                    )
                )
        return points

    if config.min_rate <= 0:
        raise ConfigurationError(
            "global sweep needs min_rate > 0 (load multipliers are relative to it)"
        )
    points = []
    for point_index, cluster in enumerate(base.clusters):
        scaled = scale_workload(base, cluster.traffic_rate / config.min_rate)
        offered = scaled.offered_erlangs()
        seeds = _replication_seeds(config, point_index)
        for name, strategy in strategies:
            replications = tuple(
                run(scaled, capacities, strategy, config.horizon, config.warmup, s)
                for s in seeds
            )
            points.append(
                SweepPoint.from_replications(
                    cluster.traffic_rate, offered, name, replications
                )
            )
    return points


def run_scenario(config: ScenarioConfig) -> list[SweepPoint]:
    """Run the base scenario (no load scaling) once per configured strategy."""
    workload = config.workload()
    offered = workload.offered_erlangs()
    seeds = _replication_seeds(config, 0)
    points = []
    for name, strategy in config.strategy_specs():
        replications = tuple(
            run(workload, config.capacities(), strategy, config.horizon, config.warmup, s)
            for s in seeds
        )
        points.append(
            SweepPoint.from_replications(config.max_rate, offered, name, replications)
        )
    return points


@dataclass(frozen=True)
class AnalyticComparison:
    """Simulated blocking of a single partition next to its Erlang-B value."""

    offered_erlangs: float
    capacity: int
    analytic_blocking: float
    simulated_blocking: float
    ci95_halfwidth: float
    absolute_difference: float
    tolerance: float
    passed: bool


def compare_analytic(config: ScenarioConfig, tolerance: float = 0.02) -> AnalyticComparison:
    """Validate the simulator against the closed-form single-partition value.

    Requires a single-partition configuration; the simulation always runs
    uncontrolled, since the closed form describes the ungated server. With
    several partitions the per-partition occupancies are correlated and the
    product form does not apply, so that case is rejected.
    """
    if config.num_partitions != 1:
        raise ConfigurationError(
            f"compare-analytic requires num_partitions = 1, got {config.num_partitions}"
        )
    if not tolerance >= 0:
        raise ConfigurationError(f"tolerance must be >= 0, got {tolerance}")
    workload = config.workload()
    offered = workload.offered_erlangs()
    analytic = erlang_b(offered, config.ports_per_partition)
    replications = [
        run(
            workload,
            config.capacities(),
            UNCONTROLLED_STRATEGY,
            config.horizon,
            config.warmup,
            s,
        )
        for s in _replication_seeds(config, 0)
    ]
    try:
        simulated, halfwidth = aggregate(replications, "server")
    except UndefinedMetricError:
        # zero offered traffic: nothing was ever denied
        simulated, halfwidth = 0.0, 0.0
    difference = abs(simulated - analytic)
    return AnalyticComparison(
        offered_erlangs=offered,
        capacity=config.ports_per_partition,
        analytic_blocking=analytic,
        simulated_blocking=simulated,
        ci95_halfwidth=halfwidth,
        absolute_difference=difference,
        tolerance=tolerance,
        passed=difference <= tolerance,
    )


def _print_points(config: ScenarioConfig, points: list[SweepPoint]) -> None:
    print(
        f"{'rate_mbps':>10} {'strategy':<44} {'server_blocking':>16} "
        f"{'ci95':>9} {'vs_threshold':>12}"
    )
    for p in sorted(points, key=lambda p: (p.traffic_rate, p.strategy)):
        if p.mean_blocking is None:
            blocking, ci, verdict = "n/a", "n/a", "n/a"
        else:
            blocking = f"{p.mean_blocking:.6f}"
            ci = f"{p.ci95_halfwidth:.6f}"
            verdict = "below" if p.mean_blocking <= config.threshold else "above"
        print(f"{p.traffic_rate:>10.4g} {p.strategy:<44} {blocking:>16} {ci:>9} {verdict:>12}")


def _write_csv(path: str, points: list[SweepPoint]) -> None:
    Path(path).write_text(to_csv(points), newline="\n")


def _cmd_run(args) -> int:
    config = load_config(args.config)
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    if args.strategy is not None:
        config = replace(config, strategy=args.strategy)
    points = run_scenario(config)
    print(f"scenario run: {config.num_clusters} clusters, seed {config.seed}, "
          f"{config.replications} replications, threshold {config.threshold}")
    _print_points(config, points)
    if args.out is not None:
        _write_csv(args.out, points)
        print(f"wrote {args.out}")
    return 0


def _cmd_sweep(args) -> int:
    config = load_config(args.config)
    points = run_sweep(config)
    print(f"sweep ({config.sweep_mode}): {config.num_clusters} points, "
          f"seed {config.seed}, {config.replications} replications per point")
    _print_points(config, points)
    _write_csv(args.out, points)
    print(f"wrote {args.out}")
    return 0


def _cmd_compare_analytic(args) -> int:
    config = load_config(args.config)
    report = compare_analytic(config, args.tolerance)
    print(f"offered load:        {report.offered_erlangs:.6g} erlangs")
    print(f"ports:               {report.capacity}")
    print(f"analytic blocking:   {report.analytic_blocking:.6f}")
    print(f"simulated blocking:  {report.simulated_blocking:.6f} "
          f"(ci95 half-width {report.ci95_halfwidth:.6f})")
    print(f"abs difference:      {report.absolute_difference:.6f}")
    print(f"tolerance:           {report.tolerance:.6f}")
    print(f"result:              {'PASS' if report.passed else 'FAIL'}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vodsim",
        description="Partitioned video-on-demand server blocking simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="simulate the base scenario once per strategy")
    p_run.add_argument("--config", required=True, help="path to key=value config file")
    p_run.add_argument("--seed", type=int, default=None, help="override the config seed")
    p_run.add_argument(
        "--strategy",
        choices=(UNCONTROLLED, POLICY, BOTH),
        default=None,
        help="override the config strategy",
    )
    p_run.add_argument("--out", default=None, help="also write results as CSV")
    p_run.set_defaults(handler=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="sweep blocking across the traffic range")
    p_sweep.add_argument("--config", required=True, help="path to key=value config file")
    p_sweep.add_argument("--out", required=True, help="CSV output path")
    p_sweep.set_defaults(handler=_cmd_sweep)

    p_cmp = sub.add_parser(
        "compare-analytic",
        help="compare single-partition simulation against the Erlang-B value",
    )
    p_cmp.add_argument("--config", required=True, help="path to key=value config file")
    p_cmp.add_argument(
        "--tolerance",
        type=float,
        default=0.02,
        help="max allowed |simulated - analytic| (default 0.02)",
    )
    p_cmp.set_defaults(handler=_cmd_compare_analytic)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except InternalConsistencyError as exc:
        print(f"internal consistency error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
