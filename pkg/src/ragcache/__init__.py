"""Retrieval pipeline with a self-tuning LRU cache and benchmark tooling."""

from .cache import CacheEntry, EmptyValueError, LRUCache
from .instruct import (
    DomainError,
    EmptyDatasetError,
    InstructModel,
    InstructSetupParams,
    generate_response,
    instruct_effectiveness,
    train_instruct_model,
)
from .metrics import (
    EmptyLogError,
    MetricsReport,
    NoRequestsError,
    QueryRecord,
    RequestCounters,
    SlidingWindow,
    hit_ratio,
    record,
    summarize,
)
from .orchestrator import (
    AdjustmentRule,
    EmptyEvalSetError,
    IntegrationResult,
    InvalidConfigError,
    SystemConfig,
    TestResults,
    Thresholds,
    evaluate,
    integrate,
    validate_config,
)
from .pipeline import LatencySimParams, Pipeline, build_pipeline, simulate_latency
from .retrieval import (
    Document,
    DuplicateDocIdError,
    InvertedIndex,
    Query,
    cached_retrieve,
    index_corpus,
    load_corpus_jsonl,
    make_document,
    make_query,
    normalize,
    retrieve_topk,
)
from .simulator import (
    ExperimentReport,
    PoolTooSmallError,
    WorkloadSpec,
    generate_workload,
    run_experiment,
    synthetic_corpus,
)
from .tuning import (
    LatencyModelParams,
    TuningDecision,
    TuningParams,
    adjust_cache_size,
    latency_reduction,
    run_tuning_loop,
    tuning_step,
)

__version__ = "0.1.0"

__all__ = [
    "AdjustmentRule",
    "CacheEntry",
    "Document",
    "DomainError",
    "DuplicateDocIdError",
    "EmptyDatasetError",
    "EmptyEvalSetError",
    "EmptyLogError",
    "EmptyValueError",
    "ExperimentReport",
    "InstructModel",
    "InstructSetupParams",
    "IntegrationResult",
    "InvalidConfigError",
    "InvertedIndex",
    "LRUCache",
    "LatencyModelParams",
    "LatencySimParams",
    "MetricsReport",
    "NoRequestsError",
    "Pipeline",
    "PoolTooSmallError",
    "Query",
    "QueryRecord",
    "RequestCounters",
    "SlidingWindow",
    "SystemConfig",
    "TestResults",
    "Thresholds",
    "TuningDecision",
    "TuningParams",
    "WorkloadSpec",
    "adjust_cache_size",
    "build_pipeline",
    "cached_retrieve",
    "evaluate",
    "generate_response",
    "generate_workload",
    "hit_ratio",
    "index_corpus",
    "instruct_effectiveness",
    "integrate",
    "latency_reduction",
    "load_corpus_jsonl",
    "make_document",
    "make_query",
    "normalize",
    "record",
    "retrieve_topk",
    "run_experiment",
    "run_tuning_loop",
    "simulate_latency",
    "summarize",
    "synthetic_corpus",
    "train_instruct_model",
    "tuning_step",
    "validate_config",
]
