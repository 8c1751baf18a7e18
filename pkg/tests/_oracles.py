"""Independent reference implementations the real code is checked against.

These deliberately use the dumbest data structures that can be eyeballed for
correctness: a plain recency-ordered list for the LRU reference and a full
scan over all documents for the scorer. They share no code with the package
beyond the normalize/idf conventions they re-state locally.
"""
from __future__ import annotations

import math
from collections import Counter


class ReferenceLRU:
    """Recency list: index 0 is least recently used, the end is most recent."""

    def __init__(self, capacity: int):
        self.capacity = capacity
        self.items: list[tuple[int, list[int]]] = []

    def _find(self, key: int) -> int | None:
        for i, (k, _) in enumerate(self.items):
            if k == key:
                return i
        return None

    def lookup(self, key: int) -> list[int] | None:
        i = self._find(key)
        if i is None:
            return None
        entry = self.items.pop(i)
        self.items.append(entry)
        return entry[1]

    def insert(self, key: int, docs: list[int]) -> list[int]:
        i = self._find(key)
        if i is not None:
            self.items.pop(i)
            self.items.append((key, list(docs)))
            return []
        self.items.append((key, list(docs)))
        evicted = []
        while len(self.items) > self.capacity:
            evicted.append(self.items.pop(0)[0])
        return evicted

    def resize(self, capacity: int) -> list[int]:
        self.capacity = capacity
        evicted = []
        while len(self.items) > self.capacity:
            evicted.append(self.items.pop(0)[0])
        return evicted


def brute_force_topk(docs, query_terms, k: int) -> list[tuple[int, float]]:
    """Exhaustive tf-idf cosine over every document, no index involved.

    Follows the same arithmetic conventions as the package scorer (idf =
    ln(1 + N/df), accumulation over sorted terms) so agreement must be exact,
    including tie order.
    """
    n = len(docs)
    df: Counter[str] = Counter()
    for doc in docs:
        df.update(set(doc.terms))

    def idf(term: str) -> float:
        return math.log(1.0 + n / df[term]) if df[term] else 0.0

    q_counts = Counter(query_terms)
    q_norm_sq = 0.0
    for term in sorted(q_counts):
        if df[term]:
            w = q_counts[term] * idf(term)
            q_norm_sq += w * w
    q_norm = math.sqrt(q_norm_sq)

    scored = []
    for doc in docs:
        d_counts = Counter(doc.terms)
        dot = 0.0
        for term in sorted(q_counts):
            if df[term] and term in d_counts:
                dot += (q_counts[term] * idf(term)) * (d_counts[term] * idf(term))
        if dot == 0.0:
            continue
        norm_sq = 0.0
        for term in sorted(d_counts):
            w = d_counts[term] * idf(term)
            norm_sq += w * w
        scored.append((doc.id, dot / (q_norm * math.sqrt(norm_sq))))
    scored.sort(key=lambda pair: (-pair[1], pair[0]))
    return scored[:k]
