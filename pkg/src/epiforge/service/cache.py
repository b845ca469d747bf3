"""Caching primitives for the three payload tiers.

Live data sits in a TTL cache; predictions live in a forever-memo keyed
by inputs (the key embeds a params digest, so recalibration naturally
invalidates); fixed data is precomputed bytes owned by the app. The
clock is injectable so tests can age entries without sleeping.
"""

from __future__ import annotations

import threading
import time
from typing import Callable


class TTLCache:
    """Thread-safe map whose entries expire ttl seconds after insertion."""

    def __init__(self, ttl_seconds: float, clock: Callable[[], float] = time.monotonic):
        self.ttl = ttl_seconds
        self.clock = clock
        self._lock = threading.Lock()
        self._entries: dict = {}  # key -> (payload, inserted_at)

    def get(self, key):
        with self._lock:
            entry = self._entries.get(key)
            if entry is None:
                return None
            payload, inserted = entry
            if self.clock() - inserted >= self.ttl:
                del self._entries[key]
                return None
            return payload

    def put(self, key, payload):
        with self._lock:
            self._entries[key] = (payload, self.clock())

    def invalidate(self, key=None):
        with self._lock:
            if key is None:
                self._entries.clear()
            else:
                self._entries.pop(key, None)


class ComputeMemo:
    """Per-key coalesced computation: concurrent requests for the same key
    share one evaluation; different keys never block each other."""

    def __init__(self):
        self._results: dict = {}
        self._locks: dict = {}
        self._guard = threading.Lock()

    def get_or_compute(self, key, compute: Callable[[], object]):
        with self._guard:
            if key in self._results:
                return self._results[key]
            lock = self._locks.setdefault(key, threading.Lock())
        with lock:
            with self._guard:
                if key in self._results:
                    return self._results[key]
            value = compute()
            with self._guard:
                self._results[key] = value
                self._locks.pop(key, None)
            return value

    def __len__(self):
        with self._guard:
            return len(self._results)
