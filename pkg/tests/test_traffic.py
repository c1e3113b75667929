"""Tests for workload construction and Poisson stream generation."""

import math

import numpy as np
import pytest
import scipy.stats

from vodsim.traffic import (
    INTERACTIVE,
    STEADY,
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


def single_cluster_workload(rate_per_s, mean_hold, seed, interactive=0.0):
    cluster = ClusterSpec(
        class_id=0,
        traffic_rate=rate_per_s,
        request_rate=rate_per_s,
        mean_holding=mean_hold,
        interactive_rate=interactive,
    )
    return WorkloadSpec(
        clusters=(cluster,),
        per_stream_bandwidth=1.0,
        min_hold=mean_hold,
        max_hold=mean_hold,
        seed=seed,
    )


class TestBuildClusters:
    def test_reference_scale_rates(self):
        clusters = build_clusters(30, 1.0, 15.5)
        rates = [c.traffic_rate for c in clusters]
        assert rates == [1.0 + 0.5 * c for c in range(30)]
        assert rates[1] == 1.5
        assert rates[-1] == 15.5

    def test_single_cluster_uses_min_rate(self):
        (only,) = build_clusters(1, 5.0, 5.0)
        assert only.traffic_rate == 5.0

    def test_three_point_spacing(self):
        rates = [c.traffic_rate for c in build_clusters(3, 1.0, 2.0)]
        assert rates == [1.0, 1.5, 2.0]

    def test_zero_count_rejected(self):
        with pytest.raises(ValueError):
            build_clusters(0, 1.0, 2.0)

    def test_inverted_range_rejected(self):
        with pytest.raises(ValueError):
            build_clusters(3, 2.0, 1.0)

    def test_request_rates_derived_from_bandwidth(self):
        clusters = build_clusters(2, 1.0, 2.0, per_stream_bandwidth=0.5)
        assert [c.request_rate for c in clusters] == [2.0, 4.0]


class TestRequestRate:
    def test_division(self):
        assert request_rate(1.0, 0.5) == 2.0
        assert request_rate(15.5, 0.5) == 31.0

    def test_zero_traffic_is_zero(self):
        assert request_rate(0.0, 0.5) == 0.0

    def test_zero_bandwidth_rejected(self):
        with pytest.raises(ValueError):
            request_rate(1.0, 0.0)

    def test_negative_bandwidth_rejected(self):
        with pytest.raises(ValueError):
            request_rate(1.0, -1.0)


class TestScalarDraws:
    def test_next_interarrival_deterministic(self):
        a = next_interarrival(np.random.default_rng(7), 2.0)
        b = next_interarrival(np.random.default_rng(7), 2.0)
        assert a == b

    def test_next_interarrival_mean(self):
        rng = np.random.default_rng(1)
        samples = [next_interarrival(rng, 2.0) for _ in range(100_000)]
        assert sum(samples) / len(samples) == pytest.approx(0.5, abs=0.01)

    def test_next_interarrival_rejects_zero_rate(self):
        with pytest.raises(ValueError):
            next_interarrival(np.random.default_rng(0), 0.0)

    def test_sample_holding_deterministic(self):
        a = sample_holding(np.random.default_rng(9), 10.0)
        b = sample_holding(np.random.default_rng(9), 10.0)
        assert a == b

    def test_sample_holding_mean(self):
        rng = np.random.default_rng(2)
        samples = [sample_holding(rng, 10.0) for _ in range(100_000)]
        assert sum(samples) / len(samples) == pytest.approx(10.0, abs=0.2)

    def test_sample_holding_rejects_zero_mean(self):
        with pytest.raises(ValueError):
            sample_holding(np.random.default_rng(0), 0.0)

    def test_draws_strictly_positive(self):
        rng = np.random.default_rng(3)
        for _ in range(10_000):
            assert next_interarrival(rng, 5.0) > 0
            assert sample_holding(rng, 0.001) > 0


class TestMergedStream:
    def test_poisson_count_band(self):
        spec = single_cluster_workload(2.0, 5.0, seed=101)
        stream = merged_arrival_stream(spec, 10_000.0)
        expected = 20_000
        assert abs(len(stream) - expected) <= 3 * math.sqrt(expected)

    def test_empty_cluster_list(self):
        spec = WorkloadSpec((), 1.0, 1.0, 2.0, 0)
        assert merged_arrival_stream(spec, 100.0) == []

    def test_superposed_rate_within_three_sigma(self):
        c0 = ClusterSpec(0, 3.0, 3.0, 2.0)
        c1 = ClusterSpec(1, 5.0, 5.0, 2.0)
        spec = WorkloadSpec((c0, c1), 1.0, 2.0, 2.0, 7)
        horizon = 5_000.0
        stream = merged_arrival_stream(spec, horizon)
        expected = 8.0 * horizon
        assert abs(len(stream) - expected) <= 3 * math.sqrt(expected)

    def test_deterministic_for_identical_spec(self):
        spec = single_cluster_workload(2.0, 5.0, seed=55)
        a = merged_arrival_stream(spec, 500.0)
        b = merged_arrival_stream(spec, 500.0)
        assert [(r.class_id, r.arrival_time, r.holding_time, r.kind) for r in a] == [
            (r.class_id, r.arrival_time, r.holding_time, r.kind) for r in b
        ]

    def test_different_seeds_differ(self):
        a = merged_arrival_stream(single_cluster_workload(2.0, 5.0, seed=1), 100.0)
        b = merged_arrival_stream(single_cluster_workload(2.0, 5.0, seed=2), 100.0)
        assert [r.arrival_time for r in a] != [r.arrival_time for r in b]

    def test_sorted_and_within_horizon(self):
        spec = single_cluster_workload(10.0, 1.0, seed=3)
        stream = merged_arrival_stream(spec, 200.0)
        times = [r.arrival_time for r in stream]
        assert times == sorted(times)
        assert all(0 <= t < 200.0 for t in times)

    def test_holding_times_positive_and_finite(self):
        spec = single_cluster_workload(20.0, 0.01, seed=4)
        stream = merged_arrival_stream(spec, 500.0)
        assert stream
        assert all(r.holding_time > 0 and math.isfinite(r.holding_time) for r in stream)

    def test_interactive_stream_disabled_by_default(self):
        spec = single_cluster_workload(5.0, 1.0, seed=5)
        assert all(r.kind == STEADY for r in merged_arrival_stream(spec, 100.0))

    def test_interactive_stream_present_when_enabled(self):
        spec = single_cluster_workload(5.0, 1.0, seed=5, interactive=2.0)
        kinds = {r.kind for r in merged_arrival_stream(spec, 200.0)}
        assert kinds == {STEADY, INTERACTIVE}

    def test_rejects_nonpositive_horizon(self):
        spec = single_cluster_workload(1.0, 1.0, seed=0)
        with pytest.raises(ValueError):
            merged_arrival_stream(spec, 0.0)

    def test_merged_interarrivals_look_exponential(self):
        # small version of the superposition check; the acceptance suite
        # runs the full N=1e4 test
        c0 = ClusterSpec(0, 2.0, 2.0, 1.0)
        c1 = ClusterSpec(1, 6.0, 6.0, 1.0)
        spec = WorkloadSpec((c0, c1), 1.0, 1.0, 1.0, 11)
        stream = merged_arrival_stream(spec, 400.0)
        times = np.array([r.arrival_time for r in stream])
        gaps = np.diff(times, prepend=0.0)
        result = scipy.stats.kstest(gaps, scipy.stats.expon(scale=1 / 8.0).cdf)
        assert result.pvalue > 0.01


class TestWorkloadSpec:
    def test_request_rate_mismatch_rejected(self):
        bad = ClusterSpec(0, 4.0, 5.0, 1.0)
        with pytest.raises(ValueError, match="request_rate"):
            WorkloadSpec((bad,), 1.0, 1.0, 2.0, 0)

    def test_holding_mean_outside_bounds_rejected(self):
        bad = ClusterSpec(0, 4.0, 4.0, 10.0)
        with pytest.raises(ValueError, match="mean_holding"):
            WorkloadSpec((bad,), 1.0, 1.0, 2.0, 0)

    def test_inverted_hold_bounds_rejected(self):
        with pytest.raises(ValueError, match="min <= max"):
            WorkloadSpec((), 1.0, 5.0, 2.0, 0)

    def test_class_ids_must_be_positions(self):
        shifted = ClusterSpec(1, 4.0, 4.0, 1.5)
        with pytest.raises(ValueError, match="class ids"):
            WorkloadSpec((shifted,), 1.0, 1.0, 2.0, 0)

    def test_seed_range_enforced(self):
        with pytest.raises(ValueError, match="seed"):
            WorkloadSpec((), 1.0, 1.0, 2.0, -1)
        with pytest.raises(ValueError, match="seed"):
            WorkloadSpec((), 1.0, 1.0, 2.0, 2**64)

    def test_offered_erlangs_sums_rate_times_hold(self):
        c0 = ClusterSpec(0, 2.0, 2.0, 3.0)
        c1 = ClusterSpec(1, 4.0, 4.0, 1.5, interactive_rate=1.0)
        spec = WorkloadSpec((c0, c1), 1.0, 1.0, 4.0, 0)
        assert spec.offered_erlangs() == pytest.approx(2 * 3.0 + 5 * 1.5)


class TestBuildAndScaleWorkload:
    def test_holding_means_within_bounds(self):
        w = build_workload(30, 1.0, 15.5, 100.0, 1.0, 200.0, seed=42)
        assert len(w.clusters) == 30
        assert all(1.0 <= c.mean_holding <= 200.0 for c in w.clusters)

    def test_holding_means_deterministic_per_seed(self):
        a = build_workload(5, 1.0, 2.0, 1.0, 1.0, 9.0, seed=13)
        b = build_workload(5, 1.0, 2.0, 1.0, 1.0, 9.0, seed=13)
        c = build_workload(5, 1.0, 2.0, 1.0, 1.0, 9.0, seed=14)
        assert [x.mean_holding for x in a.clusters] == [x.mean_holding for x in b.clusters]
        assert [x.mean_holding for x in a.clusters] != [x.mean_holding for x in c.clusters]

    def test_scaling_multiplies_rates_not_holds(self):
        base = build_workload(4, 1.0, 4.0, 2.0, 1.0, 5.0, seed=1)
        scaled = scale_workload(base, 3.0)
        for b, s in zip(base.clusters, scaled.clusters):
            assert s.traffic_rate == pytest.approx(3.0 * b.traffic_rate)
            assert s.request_rate == pytest.approx(3.0 * b.request_rate)
            assert s.mean_holding == b.mean_holding
        assert scaled.offered_erlangs() == pytest.approx(3.0 * base.offered_erlangs())

    def test_negative_multiplier_rejected(self):
        base = build_workload(2, 1.0, 2.0, 1.0, 1.0, 2.0, seed=0)
        with pytest.raises(ValueError):
            scale_workload(base, -1.0)


class TestSessionRequest:
    def test_rejects_nonpositive_holding(self):
        with pytest.raises(ValueError):
            SessionRequest(0, 1.0, 0.0)

    def test_rejects_negative_arrival(self):
        with pytest.raises(ValueError):
            SessionRequest(0, -1.0, 1.0)


def test_erlang_sum_of_k_interarrivals_smoke():
    """Sums of K consecutive gaps from one stream follow the K-stage Erlang law."""
    spec = single_cluster_workload(2.0, 1.0, seed=21)
    stream = merged_arrival_stream(spec, 3_000.0)
    times = np.array([r.arrival_time for r in stream])
    gaps = np.diff(times, prepend=0.0)
    k = 2
    usable = (len(gaps) // k) * k
    sums = gaps[:usable].reshape(-1, k).sum(axis=1)
    result = scipy.stats.kstest(sums, scipy.stats.gamma(a=k, scale=1 / 2.0).cdf)
    assert result.pvalue > 0.01


def test_interarrival_sums_match_packages_own_density():
    """Same check, but against a CDF integrated from this package's density.

    Ties the generator to the analytic module directly instead of going
    through an external distribution.
    """
    from scipy.integrate import cumulative_trapezoid

    from vodsim.analytic import erlang_k_pdf

    rate, k = 2.0, 5
    spec = single_cluster_workload(rate, 1.0, seed=21)
    stream = merged_arrival_stream(spec, 3_000.0)
    gaps = np.diff([r.arrival_time for r in stream], prepend=0.0)
    usable = (len(gaps) // k) * k
    sums = gaps[:usable].reshape(-1, k).sum(axis=1)

    grid = np.linspace(0.0, 30.0 / rate, 6001)  # tail mass beyond is ~1e-9
    pdf = np.array([erlang_k_pdf(k, rate, float(t)) for t in grid])
    cdf = cumulative_trapezoid(pdf, grid, initial=0.0)
    result = scipy.stats.kstest(sums, lambda x: np.interp(x, grid, cdf))
    assert result.pvalue > 0.01
