"""Local corpus indexing and tf-idf top-k retrieval, with a cache-fronted path.

Scoring is tf-idf cosine with idf = ln(1 + N/df) and raw term frequencies,
no stemming and no stopwords. Query fingerprints are FNV-1a 64 over the
space-joined *sorted* normalized terms, so term order never affects caching.
Accumulation always walks query terms in sorted order, which keeps scores
bit-reproducible across scoring paths that follow the same convention.
"""
from __future__ import annotations

import json
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .cache import LRUCache

_TOKEN_SPLIT = re.compile(r"[\W_]+")

FNV64_OFFSET_BASIS = 0xCBF29CE484222325
FNV64_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF


class DuplicateDocIdError(ValueError):
    """Raised when a corpus contains two documents with the same id."""


class CorpusFormatError(ValueError):
    """Raised for malformed corpus lines; the message names the line number."""


def normalize(text: str) -> list[str]:
    """Lowercase and split on runs of non-alphanumeric characters."""
    return [t for t in _TOKEN_SPLIT.split(text.lower()) if t]


def fnv1a_64(data: bytes) -> int:
    """FNV-1a 64-bit hash (offset basis 0xcbf29ce484222325, prime 0x100000001b3)."""
    h = FNV64_OFFSET_BASIS
    for byte in data:
        h ^= byte
        h = (h * FNV64_PRIME) & _MASK64
    return h


def fingerprint_terms(terms: Iterable[str]) -> int:
    """64-bit fingerprint of the sorted normalized terms."""
    return fnv1a_64(" ".join(sorted(terms)).encode("utf-8"))


@dataclass(frozen=True)
class Query:
    raw: str
    terms: tuple[str, ...]
    fingerprint: int


def make_query(raw: str) -> Query:
    terms = tuple(normalize(raw))
    return Query(raw=raw, terms=terms, fingerprint=fingerprint_terms(terms))


@dataclass(frozen=True)
class Document:
    id: int
    text: str
    terms: tuple[str, ...]


def make_document(doc_id: int, text: str) -> Document:
    if doc_id < 0:
        raise ValueError(f"document id must be >= 0, got {doc_id}")
    return Document(id=doc_id, text=text, terms=tuple(normalize(text)))


@dataclass
class InvertedIndex:
    """Term postings plus per-document idf-weighted vector norms."""

    postings: dict[str, list[tuple[int, int]]] = field(default_factory=dict)
    doc_count: int = 0
    doc_norms: dict[int, float] = field(default_factory=dict)

    def idf(self, term: str) -> float:
        df = len(self.postings.get(term, ()))
        if df == 0:
            return 0.0
        return math.log(1.0 + self.doc_count / df)

    def to_dict(self) -> dict:
        return {
            "doc_count": self.doc_count,
            "postings": {t: [list(p) for p in plist] for t, plist in self.postings.items()},
            "doc_norms": {str(doc_id): norm for doc_id, norm in self.doc_norms.items()},
        }


def index_corpus(docs: Sequence[Document]) -> InvertedIndex:
    """Build the inverted index; norms sum (tf*idf)^2 over each doc's sorted terms."""
    seen: set[int] = set()
    for doc in docs:
        if doc.id in seen:
            raise DuplicateDocIdError(f"duplicate id {doc.id}")
        seen.add(doc.id)

    index = InvertedIndex(doc_count=len(docs))
    term_docs: dict[str, dict[int, int]] = {}
    for doc in docs:
        for term, tf in Counter(doc.terms).items():
            term_docs.setdefault(term, {})[doc.id] = tf
    index.postings = {
        term: sorted(by_doc.items()) for term, by_doc in term_docs.items()
    }
    for doc in docs:
        counts = Counter(doc.terms)
        norm_sq = 0.0
        for term in sorted(counts):
            w = counts[term] * index.idf(term)
            norm_sq += w * w
        index.doc_norms[doc.id] = math.sqrt(norm_sq)
    return index


def retrieve_topk(index: InvertedIndex, query: Query, k: int = 5) -> list[tuple[int, float]]:
    """Top-k documents by tf-idf cosine, descending score, ties by ascending id.

    Documents with zero score are excluded; query terms absent from the index
    contribute nothing and are left out of the query norm.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    q_counts = Counter(query.terms)
    dots: dict[int, float] = {}
    q_norm_sq = 0.0
    for term in sorted(q_counts):
        plist = index.postings.get(term)
        if not plist:
            continue
        idf = index.idf(term)
        w_q = q_counts[term] * idf
        q_norm_sq += w_q * w_q
        for doc_id, tf in plist:
            dots[doc_id] = dots.get(doc_id, 0.0) + w_q * (tf * idf)
    if not dots:
        return []
    q_norm = math.sqrt(q_norm_sq)
    scored = [
        (doc_id, dot / (q_norm * index.doc_norms[doc_id])) for doc_id, dot in dots.items()
    ]
    scored.sort(key=lambda pair: (-pair[1], pair[0]))
    return scored[:k]


def cached_retrieve(
    cache: LRUCache, index: InvertedIndex, query: Query, k: int = 5
) -> tuple[list[int], bool]:
    """Serve document ids from the cache when possible, else retrieve and fill.

    Returns (doc ids, hit flag). The ids are identical whether served from
    the cache or the index. Empty results are not cached.
    """
    cached = cache.lookup(query.fingerprint)
    if cached is not None:
        return list(cached), True
    ids = [doc_id for doc_id, _ in retrieve_topk(index, query, k)]
    if ids:
        cache.insert(query.fingerprint, ids)
    return ids, False


def load_corpus_jsonl(path: str) -> list[Document]:
    """Read a corpus of line-delimited JSON objects {"id": int, "text": str}.

    Raises CorpusFormatError naming the offending line for malformed JSON,
    missing or mistyped fields, and duplicate ids.
    """
    docs: list[Document] = []
    seen: set[int] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(f"line {lineno}: invalid JSON ({exc.msg})") from exc
            if not isinstance(obj, dict):
                raise CorpusFormatError(f"line {lineno}: expected an object")
            doc_id = obj.get("id")
            text = obj.get("text")
            if not isinstance(doc_id, int) or isinstance(doc_id, bool) or doc_id < 0:
                raise CorpusFormatError(f"line {lineno}: 'id' must be a nonnegative integer")
            if not isinstance(text, str):
                raise CorpusFormatError(f"line {lineno}: 'text' must be a string")
            if doc_id in seen:
                raise CorpusFormatError(f"line {lineno}: duplicate id {doc_id}")
            seen.add(doc_id)
            docs.append(make_document(doc_id, text))
    return docs
