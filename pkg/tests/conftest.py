from __future__ import annotations

import pytest

from ragcache.retrieval import index_corpus, make_document
from ragcache.simulator import synthetic_corpus


@pytest.fixture
def tiny_docs():
    return [
        make_document(0, "alpha beta gamma. delta runs the show."),
        make_document(1, "beta beta epsilon! caching helps latency."),
        make_document(2, "gamma delta epsilon? retrieval is ranked."),
    ]


@pytest.fixture
def tiny_index(tiny_docs):
    return index_corpus(tiny_docs)


@pytest.fixture(scope="session")
def corpus_1k():
    return synthetic_corpus(1000, seed=7)
