"""Bounded LRU store mapping query fingerprints to retrieved document-id lists.

Capacity is counted in entries. Every operation is atomic with respect to the
others under a single-writer contract; a lookup counts as a write because it
refreshes recency.
"""
from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass
from typing import Sequence


class EmptyValueError(ValueError):
    """Raised when inserting an empty document list."""


@dataclass
class CacheEntry:
    key: int
    value: list[int]
    size_units: int
    last_access: int


class LRUCache:
    """LRU cache resizable at runtime; evictions happen oldest-access first."""

    def __init__(self, capacity: int) -> None:
        if capacity < 0:
            raise ValueError(f"capacity must be >= 0, got {capacity}")
        self._capacity = capacity
        self._entries: OrderedDict[int, CacheEntry] = OrderedDict()
        self._clock = 0

    @property
    def capacity(self) -> int:
        return self._capacity

    @property
    def clock(self) -> int:
        return self._clock

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, key: int) -> bool:
        # Membership probe for tests/diagnostics; does not refresh recency.
        return key in self._entries

    def _tick(self) -> int:
        self._clock += 1
        return self._clock

    def lookup(self, key: int) -> list[int] | None:
        """Return the stored document ids (refreshing recency) or None on miss."""
        entry = self._entries.get(key)
        if entry is None:
            return None
        entry.last_access = self._tick()
        self._entries.move_to_end(key)
        return entry.value

    def insert(self, key: int, docs: Sequence[int]) -> list[int]:
        """Store docs under key, evicting least-recently-used entries while over
        capacity. Replacing an existing key never evicts. Returns evicted keys
        in eviction order."""
        if not docs:
            raise EmptyValueError("cannot cache an empty document list")
        existing = self._entries.get(key)
        if existing is not None:
            existing.value = list(docs)
            existing.size_units = len(docs)
            existing.last_access = self._tick()
            self._entries.move_to_end(key)
            return []
        self._entries[key] = CacheEntry(key, list(docs), len(docs), self._tick())
        return self._evict_to(self._capacity)

    def resize(self, new_capacity: int) -> list[int]:
        """Set capacity, evicting LRU-first while over it. Growth evicts nothing."""
        if new_capacity < 0:
            raise ValueError(f"capacity must be >= 0, got {new_capacity}")
        self._capacity = new_capacity
        return self._evict_to(new_capacity)

    def _evict_to(self, capacity: int) -> list[int]:
        evicted: list[int] = []
        while len(self._entries) > capacity:
            key, _ = self._entries.popitem(last=False)
            evicted.append(key)
        return evicted

    def mean_size_units(self) -> float:
        """Mean document count of resident entries; 0.0 when empty."""
        if not self._entries:
            return 0.0
        return sum(e.size_units for e in self._entries.values()) / len(self._entries)

    def keys_lru_order(self) -> list[int]:
        """Resident keys from least to most recently used (ascending last_access)."""
        return list(self._entries)
