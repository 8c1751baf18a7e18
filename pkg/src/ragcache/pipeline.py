"""The wired pipeline: cache-fronted retrieval, metrics recording, and the
deterministic latency model.

All latencies are simulated, never measured: a miss pays the backend cost plus
a per-document transfer cost, a hit pays the (much smaller) cache cost scaled
down by the latency-reduction factor for the returned data size.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .cache import LRUCache
from .instruct import InstructModel, generate_response
from .metrics import QueryRecord, RequestCounters, SlidingWindow, record
from .retrieval import Document, InvertedIndex, Query, cached_retrieve
from .tuning import LatencyModelParams, latency_reduction


@dataclass(frozen=True)
class LatencySimParams:
    """Cost model constants, all in milliseconds (per_doc_ms per document)."""

    cache_hit_ms: float = 10.0
    backend_base_ms: float = 100.0
    per_doc_ms: float = 2.0


def simulate_latency(
    hit: bool, result_docs: int, lsim: LatencySimParams, lparams: LatencyModelParams
) -> float:
    """Deterministic per-query latency.

    Miss: backend_base_ms + per_doc_ms * result_docs.
    Hit:  (cache_hit_ms + per_doc_ms * result_docs) * (1 - L(result_docs)),
    where L is the latency-reduction sigmoid.
    """
    if result_docs < 0:
        raise ValueError(f"result_docs must be >= 0, got {result_docs}")
    if hit:
        base = lsim.cache_hit_ms + lsim.per_doc_ms * result_docs
        return base * (1.0 - latency_reduction(result_docs, lparams))
    return lsim.backend_base_ms + lsim.per_doc_ms * result_docs


@dataclass
class Pipeline:
    """Owns the cache, index, metrics state, and generator for one run."""

    index: InvertedIndex
    docs_by_id: dict[int, Document]
    cache: LRUCache
    counters: RequestCounters
    window: SlidingWindow
    k_retrieve: int = 5
    lsim: LatencySimParams = field(default_factory=LatencySimParams)
    lparams: LatencyModelParams = field(default_factory=LatencyModelParams)
    model: InstructModel | None = None

    def _retrieve_and_record(
        self, query: Query, relevant_doc_id: int | None
    ) -> tuple[list[int], QueryRecord]:
        doc_ids, hit = cached_retrieve(self.cache, self.index, query, self.k_retrieve)
        record(self.counters, self.window, hit)
        latency = simulate_latency(hit, len(doc_ids), self.lsim, self.lparams)
        rank = None
        if relevant_doc_id is not None and relevant_doc_id in doc_ids:
            rank = doc_ids.index(relevant_doc_id) + 1
        return doc_ids, QueryRecord(hit=hit, latency_ms=latency, relevant_rank=rank)

    def process(self, query: Query, relevant_doc_id: int | None = None) -> QueryRecord:
        """Retrieve through the cache, record the outcome, return the record."""
        _, rec = self._retrieve_and_record(query, relevant_doc_id)
        return rec

    def answer(self, query: Query, relevant_doc_id: int | None = None) -> tuple[QueryRecord, str]:
        """process() plus response generation over the retrieved documents."""
        doc_ids, rec = self._retrieve_and_record(query, relevant_doc_id)
        docs = [self.docs_by_id[d] for d in doc_ids if d in self.docs_by_id]
        model = self.model if self.model is not None else InstructModel()
        return rec, generate_response(model, query, docs)


def build_pipeline(
    docs: list[Document],
    index: InvertedIndex,
    initial_capacity: int,
    window_size: int,
    k_retrieve: int = 5,
    lsim: LatencySimParams | None = None,
    lparams: LatencyModelParams | None = None,
    model: InstructModel | None = None,
) -> Pipeline:
    return Pipeline(
        index=index,
        docs_by_id={d.id: d for d in docs},
        cache=LRUCache(initial_capacity),
        counters=RequestCounters(),
        window=SlidingWindow(window_size),
        k_retrieve=k_retrieve,
        lsim=lsim if lsim is not None else LatencySimParams(),
        lparams=lparams if lparams is not None else LatencyModelParams(),
        model=model,
    )
