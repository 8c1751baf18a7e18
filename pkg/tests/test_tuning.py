from __future__ import annotations

import json
import logging
import math

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from ragcache.cache import LRUCache
from ragcache.metrics import RequestCounters, SlidingWindow
from ragcache.pipeline import build_pipeline
from ragcache.retrieval import index_corpus, make_document, make_query
from ragcache.simulator import WorkloadSpec, generate_workload, queries_from_corpus
from ragcache.tuning import (
    LatencyModelParams,
    TuningParams,
    adjust_cache_size,
    decisions_to_jsonl,
    latency_reduction,
    round_half_up,
    run_tuning_loop,
    tuning_step,
)

# Hand-evaluated sigmoid values for k=0.05, d0=100.
L_AT_200 = 0.9933071490757153  # 1 / (1 + e^-5)
L_AT_0 = 0.0066928509242848554  # 1 / (1 + e^5)


def test_sigmoid_midpoint_is_exactly_half():
    for k in (0.0, 0.01, 0.5, -2.0, 17.0):
        assert latency_reduction(123.0, LatencyModelParams(k=k, d0=123.0)) == 0.5


def test_sigmoid_flat_when_k_zero():
    params = LatencyModelParams(k=0.0, d0=100.0)
    for d in (0.0, 1.0, 1e6):
        assert latency_reduction(d, params) == 0.5


def test_sigmoid_hand_evaluated_points():
    params = LatencyModelParams(k=0.05, d0=100.0)
    assert latency_reduction(200.0, params) == pytest.approx(L_AT_200, rel=1e-12)
    assert latency_reduction(0.0, params) == pytest.approx(L_AT_0, rel=1e-12)


def test_sigmoid_monotonicity_and_range():
    up = LatencyModelParams(k=0.05, d0=100.0)
    down = LatencyModelParams(k=-0.05, d0=100.0)
    grid = [i * 0.4 for i in range(1000)]
    ups = [latency_reduction(d, up) for d in grid]
    downs = [latency_reduction(d, down) for d in grid]
    assert all(a < b for a, b in zip(ups, ups[1:]))
    assert all(a > b for a, b in zip(downs, downs[1:]))
    assert all(0.0 < v < 1.0 for v in ups + downs)


@given(st.floats(min_value=0.0, max_value=300.0))
def test_sigmoid_symmetry_around_offset(x):
    params = LatencyModelParams(k=0.05, d0=150.0)
    total = latency_reduction(150.0 + x, params) + latency_reduction(150.0 - x, params)
    assert total == pytest.approx(1.0, abs=1e-12)


def test_adjust_cache_size_hand_evaluated():
    params = TuningParams(alpha=0.5, target_hit_ratio=0.70)
    assert adjust_cache_size(100, 0.85, params) == pytest.approx(107.5, rel=1e-12)


def test_adjust_cache_size_equilibrium_is_exact():
    params = TuningParams(alpha=0.25, target_hit_ratio=0.7)
    for s in (1.0, 64.0, 12345.0):
        assert adjust_cache_size(s, 0.7, params) == s


def test_adjust_cache_size_can_hit_zero():
    params = TuningParams(alpha=1.0, target_hit_ratio=1.0)
    assert adjust_cache_size(100, 0.0, params) == 0.0


@given(
    st.floats(min_value=1e-6, max_value=1e6),
    st.floats(min_value=0.0, max_value=1.0),
    st.floats(min_value=1e-6, max_value=10.0),
    st.floats(min_value=0.0, max_value=1.0),
)
def test_adjust_cache_size_sign_law(s, ratio, alpha, target):
    # The update term must be resolvable against 1.0 in double precision for
    # the strict inequalities to be observable.
    assume(ratio == target or abs(alpha * (ratio - target)) >= 1e-12)
    raw = adjust_cache_size(s, ratio, TuningParams(alpha=alpha, target_hit_ratio=target))
    if ratio > target:
        assert raw > s
    elif ratio < target:
        assert raw < s
    else:
        assert raw == s


@pytest.mark.parametrize(
    "value,expected", [(107.5, 108), (106.5, 107), (0.5, 1), (99.4999, 99), (0.0, 0)]
)
def test_round_half_up(value, expected):
    assert round_half_up(value) == expected


def _window_with_ratio(hits: int, misses: int) -> SlidingWindow:
    window = SlidingWindow(hits + misses)
    for _ in range(hits):
        window.push(True)
    for _ in range(misses):
        window.push(False)
    return window


def test_tuning_step_equilibrium_leaves_capacity_alone():
    cache = LRUCache(100)
    window = _window_with_ratio(7, 3)
    counters = RequestCounters(hits=7, total=10)
    tparams = TuningParams(alpha=0.5, target_hit_ratio=0.7, s_min=10, s_max=1000)
    decision = tuning_step(cache, window, counters, tparams, LatencyModelParams())
    assert decision.applied_capacity == 100
    assert decision.evicted == 0
    assert cache.capacity == 100


def test_tuning_step_applies_rounded_update():
    cache = LRUCache(100)
    window = _window_with_ratio(17, 3)  # exactly 0.85
    counters = RequestCounters(hits=17, total=20)
    tparams = TuningParams(alpha=0.5, target_hit_ratio=0.70, s_min=10, s_max=1000)
    decision = tuning_step(cache, window, counters, tparams, LatencyModelParams())
    assert decision.observed_hit_ratio == 0.85
    assert decision.raw_s_new == pytest.approx(107.5, rel=1e-12)
    assert decision.applied_capacity == 108
    assert cache.capacity == 108


def test_tuning_step_clamps_to_bounds():
    cache = LRUCache(100)
    for key in range(40):
        cache.insert(key, [key])
    window = _window_with_ratio(0, 10)
    counters = RequestCounters(hits=0, total=10)
    tparams = TuningParams(alpha=1.0, target_hit_ratio=1.0, s_min=16, s_max=64)
    decision = tuning_step(cache, window, counters, tparams, LatencyModelParams())
    assert decision.applied_capacity == 16
    assert decision.evicted == 24
    assert len(cache) == 16


def test_tuning_step_falls_back_to_cumulative_ratio():
    cache = LRUCache(100)
    window = SlidingWindow(10)
    counters = RequestCounters(hits=3, total=4)
    tparams = TuningParams(alpha=1.0, target_hit_ratio=0.5, s_min=1, s_max=1000)
    decision = tuning_step(cache, window, counters, tparams, LatencyModelParams())
    assert decision.observed_hit_ratio == 0.75
    assert decision.applied_capacity == 125


def test_tuning_step_noop_before_any_request():
    cache = LRUCache(37)
    decision = tuning_step(
        cache, SlidingWindow(10), RequestCounters(), TuningParams(), LatencyModelParams()
    )
    assert decision.observed_hit_ratio is None
    assert decision.applied_capacity == 37
    assert decision.evicted == 0


def test_tuning_step_logs_latency_branch(caplog):
    cache = LRUCache(10)
    cache.insert(1, [1, 2, 3])
    window = _window_with_ratio(1, 1)
    with caplog.at_level(logging.DEBUG, logger="ragcache.tuning"):
        tuning_step(cache, window, RequestCounters(1, 2), TuningParams(), LatencyModelParams())
    assert any("latency reduction" in m for m in caplog.messages)


def _one_doc_pipeline(initial_capacity: int, window_size: int):
    docs = [make_document(0, "only doc here")]
    return build_pipeline(docs, index_corpus(docs), initial_capacity, window_size)


def test_loop_with_zero_epochs_returns_empty_log():
    pipeline = _one_doc_pipeline(8, 4)
    queries = [make_query("only doc") for _ in range(40)]
    decisions = run_tuning_loop(pipeline, queries, TuningParams(epoch_len=4),
                                LatencyModelParams(), max_epochs=0)
    assert decisions == []


def test_loop_grows_geometrically_until_clamped():
    epoch = 10
    tparams = TuningParams(alpha=0.1, target_hit_ratio=0.5, s_min=16, s_max=130,
                           epoch_len=epoch)
    pipeline = _one_doc_pipeline(100, epoch)
    query = make_query("only doc")
    pipeline.process(query)  # warm the single entry so the loop sees 100% hits
    epochs = 12
    decisions = run_tuning_loop(pipeline, [query] * (epoch * epochs), tparams,
                                LatencyModelParams())
    assert len(decisions) == epochs
    assert all(d.observed_hit_ratio == 1.0 for d in decisions)

    expected, s = [], 100
    for _ in range(epochs):
        s = min(max(math.floor(s * 1.05 + 0.5), tparams.s_min), tparams.s_max)
        expected.append(s)
    assert [d.applied_capacity for d in decisions] == expected
    assert decisions[-1].applied_capacity == 130


def test_loop_converges_when_target_matches_workload(corpus_1k):
    # Feasible counterpart of the convergence fixture: same workload shape,
    # but the target sits at the hit ratio the starting capacity can deliver,
    # so the multiplicative law has a reachable equilibrium.
    tparams = TuningParams(alpha=0.5, target_hit_ratio=0.5, s_min=16, s_max=65536,
                           epoch_len=500)
    index = index_corpus(corpus_1k)
    pipeline = build_pipeline(corpus_1k, index, 64, 500)
    pool = queries_from_corpus(corpus_1k)
    workload = generate_workload(
        WorkloadSpec(n_queries=10000, distinct_queries=1000, zipf_s=1.0, seed=42), pool
    )
    decisions = run_tuning_loop(pipeline, workload, tparams, LatencyModelParams())
    assert len(decisions) == 20
    tail = decisions[-5:]
    assert all(abs(d.observed_hit_ratio - 0.5) <= 0.05 for d in tail)


def test_decision_jsonl_has_fixed_keys():
    cache = LRUCache(100)
    window = _window_with_ratio(17, 3)
    tparams = TuningParams(alpha=0.5, target_hit_ratio=0.70, s_min=10, s_max=1000)
    decision = tuning_step(cache, window, RequestCounters(17, 20), tparams,
                           LatencyModelParams())
    text = decisions_to_jsonl([decision])
    lines = text.splitlines()
    assert len(lines) == 1
    parsed = json.loads(lines[0])
    assert list(parsed) == [
        "epoch", "observed_hit_ratio", "raw_S_new", "applied_capacity", "evicted",
    ]
    assert parsed["epoch"] == 1
    assert parsed["applied_capacity"] == 108
