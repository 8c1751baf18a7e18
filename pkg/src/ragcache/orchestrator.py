"""End-to-end integration: validate, train, wire the pipeline, tune, test,
and deploy-or-adjust under a bounded retry budget.

The retry loop re-tunes the existing pipeline with adjusted controller
parameters; it never rebuilds the index or retrains the generator. A failed
integration is a normal return value carrying the last test results, not an
exception.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

from .instruct import train_instruct_model
from .metrics import MetricsReport, summarize
from .pipeline import LatencySimParams, Pipeline, build_pipeline
from .retrieval import Document, Query, index_corpus
from .simulator import WorkloadSpec, generate_workload, queries_from_corpus
from .tuning import LatencyModelParams, TuningDecision, TuningParams, run_tuning_loop


class InvalidConfigError(ValueError):
    """Raised by validate_config; the message names the violated constraint."""


class EmptyEvalSetError(ValueError):
    """Raised when evaluating against an empty eval set."""


@dataclass(frozen=True)
class Thresholds:
    """Deploy gates. min_hit_ratio above 1 is legal and simply unsatisfiable."""

    min_hit_ratio: float = 0.6
    max_mean_latency_ms: float = 100.0
    min_precision_at_1: float = 0.9


@dataclass(frozen=True)
class AdjustmentRule:
    """On a failed iteration: alpha *= alpha_factor and the target hit ratio
    drops to at most (observed hit ratio + target_slack), moving the
    controller toward what the workload can actually deliver."""

    alpha_factor: float = 1.5
    target_slack: float = 0.05


@dataclass(frozen=True)
class SystemConfig:
    tparams: TuningParams = field(default_factory=TuningParams)
    lparams: LatencyModelParams = field(default_factory=LatencyModelParams)
    k_retrieve: int = 5
    thresholds: Thresholds = field(default_factory=Thresholds)
    max_adjust_iterations: int = 10
    adjustment_rule: AdjustmentRule = field(default_factory=AdjustmentRule)
    initial_capacity: int = 64
    window_size: int | None = None  # None: use tparams.epoch_len


@dataclass(frozen=True)
class TestResults:
    report: MetricsReport
    satisfactory: bool


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    alpha: float
    target_hit_ratio: float
    capacity_after_tuning: int
    results: TestResults


@dataclass
class IntegrationResult:
    deployed: bool
    system: Pipeline | None
    iterations: list[IterationRecord]
    final_results: TestResults
    config_used: SystemConfig
    decisions: list[TuningDecision]


def validate_config(config: SystemConfig) -> SystemConfig:
    """Check every nested invariant, raising InvalidConfigError naming the
    first violated one. Performs no mutation; defaults are filled by the
    dataclasses themselves."""
    t = config.tparams
    if t.alpha < 0:
        raise InvalidConfigError(f"alpha: learning rate must be >= 0, got {t.alpha}")
    if not 0.0 <= t.target_hit_ratio <= 1.0:
        raise InvalidConfigError(
            f"T: target hit ratio must be within [0, 1], got {t.target_hit_ratio}"
        )
    if not 0 < t.s_min <= t.s_max:
        raise InvalidConfigError(
            f"S bounds: require 0 < s_min <= s_max, got s_min={t.s_min} s_max={t.s_max}"
        )
    if t.epoch_len < 1:
        raise InvalidConfigError(f"epoch_len: must be >= 1, got {t.epoch_len}")
    if not math.isfinite(config.lparams.k):
        raise InvalidConfigError(f"k: steepness must be finite, got {config.lparams.k}")
    if config.lparams.d0 < 0:
        raise InvalidConfigError(f"d0: size offset must be >= 0, got {config.lparams.d0}")
    if config.k_retrieve < 1:
        raise InvalidConfigError(f"k_retrieve: must be >= 1, got {config.k_retrieve}")
    th = config.thresholds
    if th.min_hit_ratio < 0:
        raise InvalidConfigError(f"min_hit_ratio: must be >= 0, got {th.min_hit_ratio}")
    if th.max_mean_latency_ms < 0:
        raise InvalidConfigError(
            f"max_mean_latency_ms: must be >= 0, got {th.max_mean_latency_ms}"
        )
    if th.min_precision_at_1 < 0:
        raise InvalidConfigError(
            f"min_precision_at_1: must be >= 0, got {th.min_precision_at_1}"
        )
    if config.max_adjust_iterations < 1:
        raise InvalidConfigError(
            f"max_adjust_iterations: must be >= 1, got {config.max_adjust_iterations}"
        )
    if config.initial_capacity < 0:
        raise InvalidConfigError(
            f"initial_capacity: must be >= 0, got {config.initial_capacity}"
        )
    if config.window_size is not None and config.window_size < 1:
        raise InvalidConfigError(f"window: size must be >= 1, got {config.window_size}")
    rule = config.adjustment_rule
    if rule.alpha_factor <= 0:
        raise InvalidConfigError(f"alpha_factor: must be > 0, got {rule.alpha_factor}")
    if rule.target_slack < 0:
        raise InvalidConfigError(f"target_slack: must be >= 0, got {rule.target_slack}")
    return config


def satisfies(report: MetricsReport, thresholds: Thresholds) -> bool:
    """Pure threshold check used to set TestResults.satisfactory."""
    return (
        report.hit_ratio >= thresholds.min_hit_ratio
        and report.mean_query_ms <= thresholds.max_mean_latency_ms
        and report.precision_at_1 >= thresholds.min_precision_at_1
    )


def evaluate(
    system: Pipeline, eval_set: Sequence[tuple[Query, int]], thresholds: Thresholds
) -> TestResults:
    """Replay the eval queries through retrieval + generation and gate the
    resulting report against the thresholds."""
    if not eval_set:
        raise EmptyEvalSetError("eval set must be nonempty")
    records = []
    for query, relevant_doc_id in eval_set:
        rec, _response = system.answer(query, relevant_doc_id)
        records.append(rec)
    report = summarize(records)
    return TestResults(report=report, satisfactory=satisfies(report, thresholds))


def integrate(
    config: SystemConfig,
    instruct_dataset: Sequence[dict[str, str]],
    corpus: list[Document],
    eval_set: Sequence[tuple[Query, int]],
    workload_spec: WorkloadSpec,
    lsim: LatencySimParams | None = None,
    query_pool: list[Query] | None = None,
) -> IntegrationResult:
    """Run the full integration sequence.

    Steps, in order: validate the config, train the generator from the
    instruct dataset (patterns registered in dataset order), build the
    cache-fronted pipeline, tune over the warmup workload, evaluate, and
    either deploy or adjust the controller parameters and re-tune, at most
    max_adjust_iterations times. Every iteration replays the same seeded
    warmup trace, so identical inputs give byte-identical decision logs.
    """
    config = validate_config(config)
    if not corpus:
        raise ValueError("corpus must be nonempty")
    model = train_instruct_model(instruct_dataset)
    index = index_corpus(corpus)
    lsim = lsim if lsim is not None else LatencySimParams()
    window_size = config.window_size if config.window_size else config.tparams.epoch_len
    pipeline = build_pipeline(
        corpus, index, config.initial_capacity, window_size,
        config.k_retrieve, lsim, config.lparams, model=model,
    )
    pool = query_pool if query_pool is not None else queries_from_corpus(corpus)
    workload = generate_workload(workload_spec, pool)

    tparams = config.tparams
    iterations: list[IterationRecord] = []
    all_decisions: list[TuningDecision] = []
    for iteration in range(1, config.max_adjust_iterations + 1):
        decisions = run_tuning_loop(pipeline, workload, tparams, config.lparams)
        all_decisions.extend(decisions)
        results = evaluate(pipeline, eval_set, config.thresholds)
        iterations.append(
            IterationRecord(
                iteration=iteration,
                alpha=tparams.alpha,
                target_hit_ratio=tparams.target_hit_ratio,
                capacity_after_tuning=pipeline.cache.capacity,
                results=results,
            )
        )
        if results.satisfactory:
            return IntegrationResult(
                deployed=True,
                system=pipeline,
                iterations=iterations,
                final_results=results,
                config_used=replace(config, tparams=tparams),
                decisions=all_decisions,
            )
        rule = config.adjustment_rule
        tparams = replace(
            tparams,
            alpha=tparams.alpha * rule.alpha_factor,
            target_hit_ratio=min(
                tparams.target_hit_ratio,
                results.report.hit_ratio + rule.target_slack,
            ),
        )
    return IntegrationResult(
        deployed=False,
        system=None,
        iterations=iterations,
        final_results=iterations[-1].results,
        config_used=replace(config, tparams=tparams),
        decisions=all_decisions,
    )


def build_manifest(
    result: IntegrationResult,
    config: SystemConfig,
    workload_spec: WorkloadSpec,
    lsim: LatencySimParams,
    generated_at: str,
) -> dict:
    """Run manifest: config echo, per-iteration test results, final status.

    generated_at is the one timestamp field and is excluded from any
    determinism comparison of the output files.
    """
    return {
        "status": "deployed" if result.deployed else "failed",
        "generated_at": generated_at,
        "config": {
            "tuning": {
                "alpha": config.tparams.alpha,
                "target_hit_ratio": config.tparams.target_hit_ratio,
                "s_min": config.tparams.s_min,
                "s_max": config.tparams.s_max,
                "epoch_len": config.tparams.epoch_len,
            },
            "latency_model": {"k": config.lparams.k, "d0": config.lparams.d0},
            "latency_sim": {
                "cache_hit_ms": lsim.cache_hit_ms,
                "backend_base_ms": lsim.backend_base_ms,
                "per_doc_ms": lsim.per_doc_ms,
            },
            "workload": {
                "n_queries": workload_spec.n_queries,
                "distinct_queries": workload_spec.distinct_queries,
                "zipf_s": workload_spec.zipf_s,
                "seed": workload_spec.seed,
            },
            "k_retrieve": config.k_retrieve,
            "initial_capacity": config.initial_capacity,
            "window_size": config.window_size,
            "max_adjust_iterations": config.max_adjust_iterations,
            "thresholds": {
                "min_hit_ratio": config.thresholds.min_hit_ratio,
                "max_mean_latency_ms": config.thresholds.max_mean_latency_ms,
                "min_precision_at_1": config.thresholds.min_precision_at_1,
            },
            "adjustment_rule": {
                "alpha_factor": config.adjustment_rule.alpha_factor,
                "target_slack": config.adjustment_rule.target_slack,
            },
        },
        "deployed_tuning": {
            "alpha": result.config_used.tparams.alpha,
            "target_hit_ratio": result.config_used.tparams.target_hit_ratio,
        },
        "iterations": [
            {
                "iteration": rec.iteration,
                "alpha": rec.alpha,
                "target_hit_ratio": rec.target_hit_ratio,
                "capacity_after_tuning": rec.capacity_after_tuning,
                "satisfactory": rec.results.satisfactory,
                "report": rec.results.report.to_dict(),
            }
            for rec in result.iterations
        ],
    }
