"""Request outcome tracking: hit/miss tallies, a bounded outcome window, and run summaries."""
from __future__ import annotations

import math
import threading
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

CSV_COLUMNS = (
    "hit_ratio",
    "mean_query_ms",
    "p50_ms",
    "p95_ms",
    "throughput_qps",
    "precision_at_1",
)


class NoRequestsError(ValueError):
    """Raised when a hit ratio is requested before any request was recorded."""


class EmptyLogError(ValueError):
    """Raised when summarizing an empty run log."""


class RequestCounters:
    """Cumulative hit/total tallies, safe for concurrent recording.

    Reads are not synchronized with writers; a reader may observe a ratio
    that lags in-flight increments.
    """

    __slots__ = ("hits", "total", "_lock")

    def __init__(self, hits: int = 0, total: int = 0) -> None:
        if hits < 0 or total < 0 or hits > total:
            raise ValueError(f"require 0 <= hits <= total, got hits={hits} total={total}")
        self.hits = hits
        self.total = total
        self._lock = threading.Lock()

    def record(self, hit: bool) -> None:
        with self._lock:
            self.total += 1
            if hit:
                self.hits += 1

    def __repr__(self) -> str:
        return f"RequestCounters(hits={self.hits}, total={self.total})"


class SlidingWindow:
    """The last `capacity` request outcomes (hit=True), oldest evicted first."""

    def __init__(self, capacity: int = 500) -> None:
        if capacity < 1:
            raise ValueError(f"window capacity must be >= 1, got {capacity}")
        self.capacity = capacity
        self._outcomes: deque[bool] = deque(maxlen=capacity)

    def push(self, hit: bool) -> None:
        self._outcomes.append(hit)

    def hit_fraction(self) -> float | None:
        """Fraction of hits among buffered outcomes, or None when empty."""
        if not self._outcomes:
            return None
        return sum(self._outcomes) / len(self._outcomes)

    @property
    def outcomes(self) -> tuple[bool, ...]:
        return tuple(self._outcomes)

    def __len__(self) -> int:
        return len(self._outcomes)


def record(counters: RequestCounters, window: SlidingWindow, hit: bool) -> None:
    """Record one request outcome into both the cumulative tallies and the window."""
    counters.record(hit)
    window.push(hit)


def hit_ratio(counters: RequestCounters) -> float:
    """hits / total, exact. Raises NoRequestsError when total is zero."""
    if counters.total == 0:
        raise NoRequestsError("hit ratio undefined: no requests recorded (total=0)")
    return counters.hits / counters.total


@dataclass(frozen=True)
class QueryRecord:
    """Outcome of one query: cache hit flag, simulated latency, and the rank
    of the known-relevant document in the returned results (None if unknown
    or absent)."""

    hit: bool
    latency_ms: float
    relevant_rank: int | None = None


@dataclass(frozen=True)
class MetricsReport:
    hit_ratio: float
    mean_query_ms: float
    p50_ms: float
    p95_ms: float
    throughput_qps: float
    precision_at_1: float

    def to_dict(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in CSV_COLUMNS}

    def csv_row(self) -> str:
        return ",".join(repr(getattr(self, name)) for name in CSV_COLUMNS)

    @staticmethod
    def csv_header() -> str:
        return ",".join(CSV_COLUMNS)


def nearest_rank_percentile(values: Sequence[float], pct: float) -> float:
    """Nearest-rank percentile: the element at rank ceil(pct/100 * n) of the
    sorted values (1-based). The percentile of a singleton is that element."""
    if not values:
        raise ValueError("percentile of empty sequence")
    ordered = sorted(values)
    rank = max(1, math.ceil(pct / 100.0 * len(ordered)))
    return ordered[rank - 1]


def summarize(run_log: Iterable[QueryRecord]) -> MetricsReport:
    """Aggregate a run log into a MetricsReport.

    Throughput assumes serial execution: queries/second over the summed
    latencies. Precision@1 counts queries whose relevant document came
    back at rank 1; records without a known relevant rank count against it.
    """
    records = list(run_log)
    if not records:
        raise EmptyLogError("cannot summarize an empty run log")
    n = len(records)
    latencies = [r.latency_ms for r in records]
    total_seconds = sum(latencies) / 1000.0
    return MetricsReport(
        hit_ratio=sum(r.hit for r in records) / n,
        mean_query_ms=sum(latencies) / n,
        p50_ms=nearest_rank_percentile(latencies, 50.0),
        p95_ms=nearest_rank_percentile(latencies, 95.0),
        throughput_qps=n / total_seconds if total_seconds > 0 else 0.0,
        precision_at_1=sum(1 for r in records if r.relevant_rank == 1) / n,
    )
