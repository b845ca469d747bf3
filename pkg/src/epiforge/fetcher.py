"""Upstream live-data boundary.

Vendors come and go (and revoke API access without notice), so the
service depends only on this small interface. The default implementation
reads a JSON fixture file; tests inject a failing fetcher to exercise the
stale-fallback path.

Fixture document shape:

    {
      "as_of": "2020-05-29T12:00:00Z",
      "global": {"affected": .., "dead": .., "recovered": ..},
      "countries": {"<CC>": {"affected": .., "dead": .., "recovered": ..}, ...}
    }
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Protocol

from .errors import FetchError


class LiveFetcher(Protocol):
    def fetch(self) -> dict:
        """Return the full live snapshot document; raise FetchError on failure."""
        ...


class FixtureFetcher:
    """Reads the snapshot from a local JSON file on every call."""

    def __init__(self, path):
        self.path = Path(path)

    def fetch(self) -> dict:
        try:
            with open(self.path) as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise FetchError(f"fixture {self.path}: {exc}") from exc
        if "countries" not in doc or "global" not in doc:
            raise FetchError(f"fixture {self.path}: missing global/countries sections")
        return doc


class FailingFetcher:
    """Always raises; stands in for a dead upstream in tests."""

    def __init__(self, message: str = "upstream unavailable"):
        self.message = message
        self.calls = 0

    def fetch(self) -> dict:
        self.calls += 1
        raise FetchError(self.message)


class CountingFetcher:
    """Wraps another fetcher and counts calls; for cache-hit assertions."""

    def __init__(self, inner):
        self.inner = inner
        self.calls = 0

    def fetch(self) -> dict:
        self.calls += 1
        return self.inner.fetch()
