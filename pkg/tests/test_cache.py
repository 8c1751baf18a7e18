from __future__ import annotations

import random

import pytest

from _oracles import ReferenceLRU
from ragcache.cache import EmptyValueError, LRUCache


def test_lookup_on_empty_cache_misses():
    cache = LRUCache(4)
    assert cache.lookup(123) is None


def test_read_your_write():
    cache = LRUCache(4)
    cache.insert(1, [10])
    assert cache.lookup(1) == [10]


def test_insert_beyond_capacity_evicts_lru():
    cache = LRUCache(2)
    assert cache.insert(1, [1]) == []
    assert cache.insert(2, [2]) == []
    assert cache.insert(3, [3]) == [1]
    assert set(cache.keys_lru_order()) == {2, 3}


def test_lookup_refreshes_recency_before_eviction():
    cache = LRUCache(2)
    cache.insert(1, [1])
    cache.insert(2, [2])
    cache.lookup(1)
    assert cache.insert(3, [3]) == [2]


def test_reinsert_existing_key_replaces_without_eviction():
    cache = LRUCache(2)
    cache.insert(1, [1])
    cache.insert(2, [2])
    assert cache.insert(1, [1, 1]) == []
    assert cache.lookup(1) == [1, 1]
    assert len(cache) == 2


def test_insert_rejects_empty_docs():
    with pytest.raises(EmptyValueError):
        LRUCache(2).insert(1, [])


def test_resize_growth_evicts_nothing():
    cache = LRUCache(100)
    for i in range(50):
        cache.insert(i, [i])
    assert cache.resize(200) == []
    assert cache.capacity == 200
    assert len(cache) == 50


def test_resize_shrink_evicts_lru_first():
    cache = LRUCache(4)
    for key in (1, 2, 3, 4):
        cache.insert(key, [key])
    assert cache.resize(2) == [1, 2]
    assert cache.keys_lru_order() == [3, 4]


def test_resize_to_zero_drains_in_lru_order():
    cache = LRUCache(3)
    for key in (7, 8, 9):
        cache.insert(key, [key])
    cache.lookup(7)
    assert cache.resize(0) == [8, 9, 7]
    assert len(cache) == 0


def test_insert_then_lookup_always_hits_with_capacity():
    cache = LRUCache(1)
    for key in range(20):
        cache.insert(key, [key])
        assert cache.lookup(key) == [key]


def test_eviction_order_is_ascending_last_access():
    cache = LRUCache(5)
    for key in range(5):
        cache.insert(key, [key])
    cache.lookup(0)
    cache.lookup(3)
    # access order now: 1, 2, 4, 0, 3
    assert cache.resize(0) == [1, 2, 4, 0, 3]


def random_trace(rng: random.Random, ops: int, key_space: int = 64):
    trace = []
    for _ in range(ops):
        r = rng.random()
        if r < 0.6:
            trace.append(("lookup", rng.randrange(key_space)))
        elif r < 0.9:
            key = rng.randrange(key_space)
            trace.append(("insert", key, [key, key + 1]))
        else:
            trace.append(("resize", rng.randint(1, 48)))
    return trace


def apply_trace(cache, trace):
    """Replay a trace, returning (hit flags, eviction lists) for comparison."""
    hits, evictions = [], []
    for op in trace:
        if op[0] == "lookup":
            hits.append(cache.lookup(op[1]) is not None)
        elif op[0] == "insert":
            evictions.append(cache.insert(op[1], op[2]))
        else:
            evictions.append(cache.resize(op[1]))
    return hits, evictions


@pytest.mark.parametrize("seed", range(10))
def test_trace_matches_reference(seed):
    rng = random.Random(seed)
    capacity = rng.randint(1, 32)
    trace = random_trace(rng, 2000)
    real = LRUCache(capacity)
    ref = ReferenceLRU(capacity)
    real_hits, real_evs = apply_trace(real, trace)
    ref_hits, ref_evs = apply_trace(ref, trace)
    assert real_hits == ref_hits
    assert real_evs == ref_evs
    assert len(real) <= real.capacity


def test_entry_count_never_exceeds_capacity():
    rng = random.Random(99)
    cache = LRUCache(8)
    for op in random_trace(rng, 3000):
        if op[0] == "lookup":
            cache.lookup(op[1])
        elif op[0] == "insert":
            cache.insert(op[1], op[2])
        else:
            cache.resize(op[1])
        assert len(cache) <= cache.capacity
