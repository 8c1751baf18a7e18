"""Seeded synthetic workloads and tuned-vs-static cache experiments.

Workload queries are drawn from a pool with probability proportional to
rank^(-zipf_s) using NumPy's PCG64 generator, so every stream is reproducible
from its seed (test vectors for the generator live in the docs and the test
suite). Time is simulated throughout; nothing here measures the wall clock.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .metrics import MetricsReport, QueryRecord, summarize
from .pipeline import LatencySimParams, Pipeline, build_pipeline
from .retrieval import Document, Query, index_corpus, make_document, make_query
from .tuning import TuningDecision, tuning_step

DELTA_UNDEFINED = None


class PoolTooSmallError(ValueError):
    """Raised when a workload wants more distinct queries than the pool has."""


@dataclass(frozen=True)
class WorkloadSpec:
    n_queries: int
    distinct_queries: int
    zipf_s: float = 1.0
    seed: int = 42


def zipf_probabilities(distinct: int, s: float) -> np.ndarray:
    """Normalized rank probabilities p_i proportional to i^(-s), i = 1..distinct."""
    if distinct < 1:
        raise ValueError(f"distinct must be >= 1, got {distinct}")
    if s < 0:
        raise ValueError(f"zipf exponent must be >= 0, got {s}")
    weights = np.arange(1, distinct + 1, dtype=float) ** (-s)
    return weights / weights.sum()


def generate_indices(spec: WorkloadSpec) -> np.ndarray:
    """0-based pool indices for the workload, drawn via inverse CDF on PCG64."""
    cumulative = np.cumsum(zipf_probabilities(spec.distinct_queries, spec.zipf_s))
    cumulative[-1] = 1.0
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    uniforms = rng.random(spec.n_queries)
    return np.searchsorted(cumulative, uniforms, side="right")


def generate_workload(spec: WorkloadSpec, query_pool: list[Query]) -> list[Query]:
    """Materialize the query stream for the spec over the given pool."""
    if spec.distinct_queries > len(query_pool):
        raise PoolTooSmallError(
            f"workload wants {spec.distinct_queries} distinct queries, "
            f"pool has {len(query_pool)}"
        )
    return [query_pool[i] for i in generate_indices(spec)]


def synthetic_corpus(
    n_docs: int, seed: int = 0, vocab_size: int = 200, words_per_doc: int = 12
) -> list[Document]:
    """Deterministic corpus where doc i opens with a marker term unique to it,
    followed by filler words drawn from a shared vocabulary."""
    rng = np.random.Generator(np.random.PCG64(seed))
    vocab = [f"word{j:03d}" for j in range(vocab_size)]
    docs = []
    for i in range(n_docs):
        fillers = rng.integers(0, vocab_size, size=words_per_doc)
        body = " ".join(vocab[j] for j in fillers)
        docs.append(make_document(i, f"subject{i:05d} {body}."))
    return docs


def queries_from_corpus(docs: list[Document], terms_per_query: int = 3) -> list[Query]:
    """One query per document: its first few normalized terms, verbatim order."""
    return [make_query(" ".join(doc.terms[:terms_per_query])) for doc in docs]


def eval_pairs_from_corpus(
    docs: list[Document], n: int, terms_per_query: int = 3
) -> list[tuple[Query, int]]:
    """(query, relevant doc id) pairs built with the same phrase rule as the pool."""
    pool = queries_from_corpus(docs[:n], terms_per_query)
    return [(query, doc.id) for query, doc in zip(pool, docs)]


@dataclass
class ExperimentReport:
    """Static-arm and tuned-arm summaries plus per-metric percent change."""

    baseline: MetricsReport
    tuned: MetricsReport
    deltas: dict[str, float | None]
    tuned_decisions: list[TuningDecision] = field(default_factory=list, repr=False)

    # Row labels for the comparison table; values map onto MetricsReport fields.
    TABLE_ROWS = (
        ("Speed (ms/query)", "mean_query_ms"),
        ("Cache Hit Ratio", "hit_ratio"),
        ("Latency (ms)", "p50_ms"),
        ("Data Throughput (queries/s)", "throughput_qps"),
        ("Response Time (ms)", "p95_ms"),
        ("Precision@1", "precision_at_1"),
    )

    def to_dict(self) -> dict:
        return {
            "baseline": self.baseline.to_dict(),
            "tuned": self.tuned.to_dict(),
            "deltas_pct": dict(self.deltas),
        }

    def to_table_csv(self) -> str:
        """Comparison table: Metric, Pre-Integration, Post-Integration, % Improvement.

        The improvement column is the signed relative change
        100 * (post - pre) / pre, 'n/a' when the pre value is zero.
        """
        lines = ["Metric,Pre-Integration,Post-Integration,% Improvement"]
        for label, name in self.TABLE_ROWS:
            pre = getattr(self.baseline, name)
            post = getattr(self.tuned, name)
            delta = self.deltas[name]
            delta_s = "n/a" if delta is None else f"{delta:+.3f}%"
            lines.append(f"{label},{pre:.6f},{post:.6f},{delta_s}")
        return "\n".join(lines) + "\n"


def metric_deltas(baseline: MetricsReport, tuned: MetricsReport) -> dict[str, float | None]:
    """Signed percent change per metric; None marks an undefined (pre=0) delta."""
    deltas: dict[str, float | None] = {}
    for _, name in ExperimentReport.TABLE_ROWS:
        pre = getattr(baseline, name)
        post = getattr(tuned, name)
        deltas[name] = DELTA_UNDEFINED if pre == 0 else 100.0 * (post - pre) / pre
    return deltas


def _run_arm(
    docs: list[Document],
    index,
    pool: list[Query],
    truth: list[int],
    indices: np.ndarray,
    initial_capacity: int,
    window_size: int,
    k_retrieve: int,
    lsim: LatencySimParams,
    tparams,
    lparams,
    tune: bool,
) -> tuple[list[QueryRecord], list[TuningDecision], Pipeline]:
    pipeline = build_pipeline(
        docs, index, initial_capacity, window_size, k_retrieve, lsim, lparams
    )
    records: list[QueryRecord] = []
    decisions: list[TuningDecision] = []
    pending = 0
    for i in indices:
        records.append(pipeline.process(pool[i], truth[i]))
        pending += 1
        if tune and pending == tparams.epoch_len:
            decisions.append(
                tuning_step(pipeline.cache, pipeline.window, pipeline.counters, tparams, lparams)
            )
            pending = 0
    return records, decisions, pipeline


def run_experiment(config, spec: WorkloadSpec, corpus: list[Document],
                   lsim: LatencySimParams, enable_tuning: bool = True) -> ExperimentReport:
    """Run the identical workload twice, static cache vs controller enabled,
    and report both summaries with percent deltas. Both arms share the seed;
    only tuning differs. `enable_tuning=False` turns the second arm static
    too, which must produce all-zero deltas."""
    index = index_corpus(corpus)
    pool = queries_from_corpus(corpus)
    truth = [doc.id for doc in corpus]
    if spec.distinct_queries > len(pool):
        raise PoolTooSmallError(
            f"workload wants {spec.distinct_queries} distinct queries, "
            f"pool has {len(pool)}"
        )
    indices = generate_indices(spec)
    window_size = config.window_size if config.window_size else config.tparams.epoch_len

    base_records, _, _ = _run_arm(
        corpus, index, pool, truth, indices, config.initial_capacity, window_size,
        config.k_retrieve, lsim, config.tparams, config.lparams, tune=False,
    )
    tuned_records, decisions, _ = _run_arm(
        corpus, index, pool, truth, indices, config.initial_capacity, window_size,
        config.k_retrieve, lsim, config.tparams, config.lparams, tune=enable_tuning,
    )
    baseline = summarize(base_records)
    tuned = summarize(tuned_records)
    return ExperimentReport(
        baseline=baseline,
        tuned=tuned,
        deltas=metric_deltas(baseline, tuned),
        tuned_decisions=decisions,
    )
