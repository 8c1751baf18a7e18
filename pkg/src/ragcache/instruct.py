"""Deterministic stand-in for an instruction-following generator.

Training memorizes exact normalized-instruction -> response templates; queries
without a trained pattern fall back to the corpus sentence with the highest
query-term overlap. Also hosts the instruct-setup effectiveness score, a
configuration-derived scalar that is reported but gates nothing.
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .retrieval import Document, Query, normalize

_SENTENCE_SPLIT = re.compile(r"(?<=[.!?])(?:\s+|$)")

NO_ANSWER = "NO_ANSWER"


class EmptyDatasetError(ValueError):
    """Raised when training on an empty dataset."""


class DatasetFormatError(ValueError):
    """Raised for malformed instruct-dataset lines; names the line number."""


class DomainError(ValueError):
    """Raised when effectiveness-score inputs fall outside the math's domain."""


@dataclass(frozen=True)
class InstructSetupParams:
    """Inputs to the effectiveness score; all are user-supplied configuration."""

    alpha: float
    beta: float
    gamma: float
    delta: float
    epsilon: float
    zeta: float
    x: float
    y: float


def instruct_effectiveness(p: InstructSetupParams) -> float:
    """(alpha*beta/gamma) * (sqrt(delta) * log_epsilon(zeta)) * (max(x,y)/min(x,y))."""
    if p.gamma == 0:
        raise ZeroDivisionError("gamma must be nonzero")
    if min(p.x, p.y) == 0:
        raise ZeroDivisionError("min(x, y) must be nonzero")
    if p.delta < 0:
        raise DomainError(f"delta must be >= 0, got {p.delta}")
    if p.zeta <= 0:
        raise DomainError(f"zeta must be > 0, got {p.zeta}")
    if p.epsilon <= 0 or p.epsilon == 1:
        raise DomainError(f"epsilon must be > 0 and != 1, got {p.epsilon}")
    return (
        (p.alpha * p.beta / p.gamma)
        * (math.sqrt(p.delta) * math.log(p.zeta, p.epsilon))
        * (max(p.x, p.y) / min(p.x, p.y))
    )


@dataclass
class InstructModel:
    """Exact-match pattern -> template responder; immutable once trained."""

    templates: dict[str, str] = field(default_factory=dict)
    trained_on: str = ""


def _pattern_key(text: str) -> str:
    return " ".join(normalize(text))


def train_instruct_model(
    dataset: Sequence[dict[str, str]], trained_on: str = "inline"
) -> InstructModel:
    """Memorize instruction -> response pairs; later duplicates win."""
    if not dataset:
        raise EmptyDatasetError("instruct dataset must be nonempty")
    model = InstructModel(trained_on=trained_on)
    for item in dataset:
        model.templates[_pattern_key(item["instruction"])] = item["response"]
    return model


def split_sentences(text: str) -> list[str]:
    """Split on '.', '!' or '?' followed by whitespace or end of text."""
    return [part.strip() for part in _SENTENCE_SPLIT.split(text) if part.strip()]


def generate_response(model: InstructModel, query: Query, docs: Sequence[Document]) -> str:
    """Trained template when the query matches a pattern exactly, otherwise the
    document sentence with maximal query-term overlap (ties: lowest doc id,
    then earliest sentence). NO_ANSWER when there is nothing to extract."""
    template = model.templates.get(" ".join(query.terms))
    if template is not None:
        return template

    query_terms = set(query.terms)
    best: str | None = None
    best_overlap = -1
    for doc in sorted(docs, key=lambda d: d.id):
        for sentence in split_sentences(doc.text):
            overlap = len(query_terms & set(normalize(sentence)))
            if overlap > best_overlap:
                best_overlap = overlap
                best = sentence
    return best if best is not None else NO_ANSWER


def load_instruct_jsonl(path: str) -> list[dict[str, str]]:
    """Read {"instruction": str, "response": str} objects, one per line."""
    dataset: list[dict[str, str]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetFormatError(f"line {lineno}: invalid JSON ({exc.msg})") from exc
            if (
                not isinstance(obj, dict)
                or not isinstance(obj.get("instruction"), str)
                or not isinstance(obj.get("response"), str)
            ):
                raise DatasetFormatError(
                    f"line {lineno}: expected object with string 'instruction' and 'response'"
                )
            dataset.append({"instruction": obj["instruction"], "response": obj["response"]})
    return dataset
