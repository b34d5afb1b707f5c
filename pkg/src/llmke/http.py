"""Shared HTTP plumbing: retries with backoff, per-host pacing, lookup cache."""

from __future__ import annotations

import email.utils
import json
import logging
import threading
import time
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable
from urllib.parse import urlsplit

import httpx

logger = logging.getLogger(__name__)

USER_AGENT = "llmke/0.1 (knowledge-probing research pipeline; python-httpx)"
RETRY_STATUS = {408, 425, 429, 500, 502, 503, 504}


class MissingFixtureError(LookupError):
    """A replay-mode lookup had no recorded answer."""


class TransportError(RuntimeError):
    """An HTTP exchange failed for good (after retries, or non-retryable)."""


class RetryPolicy:
    def __init__(self, max_attempts: int = 5, base_delay: float = 1.0, factor: float = 2.0,
                 max_delay: float = 60.0, sleep: Callable[[float], None] = time.sleep):
        self.max_attempts = max_attempts
        self.base_delay = base_delay
        self.factor = factor
        self.max_delay = max_delay
        self.sleep = sleep

    def delay(self, attempt: int, retry_after: float | None = None) -> float:
        if retry_after is not None:
            return min(max(retry_after, 0.0), self.max_delay)
        return min(self.base_delay * self.factor ** attempt, self.max_delay)


def parse_retry_after(value: str | None) -> float | None:
    if not value:
        return None
    try:
        return float(value)
    except ValueError:
        pass
    try:
        when = email.utils.parsedate_to_datetime(value)
    except (TypeError, ValueError):
        return None
    return max(0.0, (when - datetime.now(timezone.utc)).total_seconds())


class HostPacer:
    """Minimum spacing between requests to the same host, shared by threads."""

    def __init__(self, min_interval: float = 0.0):
        self.min_interval = min_interval
        self._next: dict[str, float] = {}
        self._lock = threading.Lock()

    def wait(self, url: str) -> None:
        if self.min_interval <= 0:
            return
        host = urlsplit(url).netloc
        with self._lock:
            now = time.monotonic()
            slot = max(now, self._next.get(host, now))
            self._next[host] = slot + self.min_interval
        if slot > now:
            time.sleep(slot - now)


def request_with_retry(client: httpx.Client, method: str, url: str, *,
                       policy: RetryPolicy | None = None, pacer: HostPacer | None = None,
                       **kwargs) -> httpx.Response:
    """Send a request, retrying transient failures with exponential backoff.

    429/5xx and transport errors are retried; a Retry-After header overrides
    the computed delay. Other 4xx responses fail immediately.
    """
    policy = policy or RetryPolicy()
    last: str = ""
    for attempt in range(policy.max_attempts):
        if pacer is not None:
            pacer.wait(url)
        retry_after = None
        try:
            resp = client.request(method, url, **kwargs)
        except httpx.TransportError as e:
            last = f"{type(e).__name__}: {e}"
        else:
            if resp.status_code < 400:
                return resp
            last = f"HTTP {resp.status_code}"
            if resp.status_code not in RETRY_STATUS:
                raise TransportError(f"{method} {url} failed: {last}: {resp.text[:200]}")
            retry_after = parse_retry_after(resp.headers.get("retry-after"))
        if attempt + 1 < policy.max_attempts:
            wait = policy.delay(attempt, retry_after)
            logger.warning("%s %s: %s; retrying in %.1fs", method, url, last, wait)
            policy.sleep(wait)
    raise TransportError(f"{method} {url} failed after {policy.max_attempts} attempts: {last}")


def canonical_key(key: Any) -> str:
    return json.dumps(key, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


class LookupStore:
    """Append-only JSONL cache of external lookups keyed by (namespace, key).

    With ``offline=True`` a miss raises :class:`MissingFixtureError` instead of
    fetching, which is how replay runs stay hermetic.
    """

    def __init__(self, path: str | Path | None = None, offline: bool = False,
                 extra_paths: tuple[str | Path, ...] = ()):
        self.path = Path(path) if path is not None else None
        self.offline = offline
        self._data: dict[tuple[str, str], Any] = {}
        self._lock = threading.Lock()
        self.hits: list[tuple[str, str]] = []
        for p in (*extra_paths, *( [self.path] if self.path else [] )):
            self._load(Path(p))

    def _load(self, path: Path) -> None:
        if not path.exists():
            return
        with path.open(encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    row = json.loads(line)
                    self._data[(row["namespace"], row["key"])] = row["value"]

    def __contains__(self, item: tuple[str, Any]) -> bool:
        namespace, key = item
        return (namespace, canonical_key(key)) in self._data

    def get(self, namespace: str, key: Any, fetch: Callable[[], Any] | None = None) -> Any:
        k = (namespace, canonical_key(key))
        with self._lock:
            if k in self._data:
                self.hits.append(k)
                return self._data[k]
        if self.offline or fetch is None:
            raise MissingFixtureError(f"no recorded {namespace} lookup for {k[1]}")
        value = fetch()
        self.put(namespace, key, value)
        return value

    def put(self, namespace: str, key: Any, value: Any) -> None:
        k = (namespace, canonical_key(key))
        with self._lock:
            self._data[k] = value
            if self.path is not None:
                self.path.parent.mkdir(parents=True, exist_ok=True)
                row = {"namespace": namespace, "key": k[1], "value": value,
                       "fetched_at": datetime.now(timezone.utc).isoformat(timespec="seconds")}
                with self.path.open("a", encoding="utf-8") as fh:
                    fh.write(json.dumps(row, ensure_ascii=False) + "\n")
