"""Feedback controller for cache capacity.

Each epoch the controller evaluates two things: the windowed hit ratio, which
drives a multiplicative capacity update, and the latency-reduction curve over
the mean resident entry size, which is logged for observation only. The update
law is

    raw = S_current * (1 + alpha * (hit_ratio - target))

so a hit ratio above target grows the cache and one below target shrinks it.
The applied capacity is the raw value rounded half-up and clamped to
[s_min, s_max]; without the clamp the multiplicative law can pin itself at
zero or grow without bound.
"""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable

from .cache import LRUCache
from .metrics import RequestCounters, SlidingWindow, hit_ratio

if TYPE_CHECKING:  # pragma: no cover
    from .pipeline import Pipeline
    from .retrieval import Query

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class LatencyModelParams:
    """Sigmoid latency-reduction constants: steepness k and size offset d0."""

    k: float = 0.05
    d0: float = 100.0


@dataclass(frozen=True)
class TuningParams:
    alpha: float = 0.5
    target_hit_ratio: float = 0.85
    s_min: int = 16
    s_max: int = 65536
    epoch_len: int = 500


@dataclass(frozen=True)
class TuningDecision:
    """One controller step: the ratio it saw, the raw update, what was applied.

    observed_hit_ratio is None for the no-op decision taken before any
    request has been recorded.
    """

    observed_hit_ratio: float | None
    raw_s_new: float
    applied_capacity: int
    evicted: int


def latency_reduction(d: float, params: LatencyModelParams) -> float:
    """Latency-reduction factor 1 / (1 + e^(-k*(d - d0))) for data size d."""
    t = params.k * (d - params.d0)
    if t >= 0:
        return 1.0 / (1.0 + math.exp(-t))
    e = math.exp(t)
    return e / (1.0 + e)


def adjust_cache_size(s_current: float, observed_ratio: float, params: TuningParams) -> float:
    """Raw (unrounded, unclamped) capacity update from the observed hit ratio."""
    return s_current * (1.0 + params.alpha * (observed_ratio - params.target_hit_ratio))


def round_half_up(x: float) -> int:
    """Round to nearest integer with halves going up (107.5 -> 108)."""
    return math.floor(x + 0.5)


def tuning_step(
    cache: LRUCache,
    window: SlidingWindow,
    counters: RequestCounters,
    tparams: TuningParams,
    lparams: LatencyModelParams,
) -> TuningDecision:
    """Run one controller step against the cache and return the decision.

    Reads the windowed hit ratio, falling back to the cumulative ratio when
    the window is empty and to a no-op decision when nothing was recorded at
    all. The latency-reduction factor over the mean resident entry size is
    computed on the pre-resize state and logged; it does not affect capacity.
    """
    observed = window.hit_fraction()
    if observed is None:
        if counters.total == 0:
            return TuningDecision(None, float(cache.capacity), cache.capacity, 0)
        observed = hit_ratio(counters)

    mean_units = cache.mean_size_units()
    if mean_units > 0:
        log.debug(
            "latency reduction %.6f at mean entry size %.2f",
            latency_reduction(mean_units, lparams),
            mean_units,
        )

    raw = adjust_cache_size(cache.capacity, observed, tparams)
    applied = min(max(round_half_up(raw), tparams.s_min), tparams.s_max)
    evicted = cache.resize(applied)
    return TuningDecision(observed, raw, applied, len(evicted))


def run_tuning_loop(
    pipeline: "Pipeline",
    queries: Iterable["Query"],
    tparams: TuningParams,
    lparams: LatencyModelParams,
    max_epochs: int | None = None,
) -> list[TuningDecision]:
    """Process queries through the pipeline, stepping the controller every
    epoch_len requests. Stops when the queries are exhausted or max_epochs
    controller steps were taken. Returns the full decision log."""
    decisions: list[TuningDecision] = []
    pending = 0
    for query in queries:
        if max_epochs is not None and len(decisions) >= max_epochs:
            break
        pipeline.process(query)
        pending += 1
        if pending == tparams.epoch_len:
            decisions.append(
                tuning_step(pipeline.cache, pipeline.window, pipeline.counters, tparams, lparams)
            )
            pending = 0
    return decisions


def decision_jsonl_line(epoch: int, decision: TuningDecision) -> str:
    """Serialize one decision as a JSON object with the fixed key set."""
    return json.dumps(
        {
            "epoch": epoch,
            "observed_hit_ratio": decision.observed_hit_ratio,
            "raw_S_new": decision.raw_s_new,
            "applied_capacity": decision.applied_capacity,
            "evicted": decision.evicted,
        }
    )


def decisions_to_jsonl(decisions: Iterable[TuningDecision]) -> str:
    """Line-delimited JSON for a decision log, epochs numbered from 1."""
    lines = [decision_jsonl_line(i, d) for i, d in enumerate(decisions, 1)]
    return "".join(line + "\n" for line in lines)
