"""Chat-completion access: live HTTP provider, fixture replay, request cache."""

from __future__ import annotations

import hashlib
import json
import logging
import os
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Protocol

import httpx

from .http import MissingFixtureError, RetryPolicy, TransportError, USER_AGENT, request_with_retry

logger = logging.getLogger(__name__)

DEFAULT_BASE_URL = "https://api.openai.com/v1"
DEFAULT_KEY_ENV = "OPENAI_API_KEY"


class FixtureConflictError(ValueError):
    pass


class MalformedResponseError(TransportError):
    pass


@dataclass(frozen=True)
class ChatRequest:
    model_name: str
    messages: tuple[tuple[str, str], ...]
    temperature: float = 0.0
    max_output_tokens: int = 512

    def __post_init__(self):
        msgs = tuple((m.role, m.text) if hasattr(m, "role") else (m[0], m[1]) for m in self.messages)
        object.__setattr__(self, "messages", msgs)
        if not msgs:
            raise ValueError("a chat request needs at least one message")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")

    def wire_messages(self) -> list[dict]:
        return [{"role": r, "content": t} for r, t in self.messages]


@dataclass(frozen=True)
class ChatResponse:
    text: str
    provider: str  # "live" | "replay"
    cached: bool = False
    latency_ms: float = 0.0


def cache_key(req: ChatRequest) -> str:
    """Content hash over model, ordered (role, text) messages and temperature.

    max_output_tokens is deliberately excluded.
    """
    payload = {
        "model": req.model_name,
        "messages": [{"role": r, "content": t} for r, t in req.messages],
        "temperature": float(req.temperature),
    }
    blob = json.dumps(payload, sort_keys=True, ensure_ascii=False, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


class FixtureStore:
    """digest -> response text, persisted as JSONL ``{digest, response_text}``."""

    def __init__(self, path: str | Path | None = None, entries: dict[str, str] | None = None):
        self.path = Path(path) if path is not None else None
        self.entries: dict[str, str] = dict(entries or {})
        self._lock = threading.Lock()
        if self.path is not None and self.path.exists():
            with self.path.open(encoding="utf-8") as fh:
                for line in fh:
                    if line.strip():
                        row = json.loads(line)
                        self._add(row["digest"], row["response_text"], persist=False)

    def __contains__(self, digest: str) -> bool:
        return digest in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def get(self, digest: str) -> str | None:
        return self.entries.get(digest)

    def _add(self, digest: str, text: str, persist: bool) -> None:
        with self._lock:
            if digest in self.entries:
                if self.entries[digest] != text:
                    raise FixtureConflictError(f"conflicting recorded text for digest {digest}")
                return
            self.entries[digest] = text
            if persist and self.path is not None:
                self.path.parent.mkdir(parents=True, exist_ok=True)
                with self.path.open("a", encoding="utf-8") as fh:
                    fh.write(json.dumps({"digest": digest, "response_text": text}, ensure_ascii=False) + "\n")

    def add(self, digest: str, text: str) -> None:
        self._add(digest, text, persist=True)

    def save(self, path: str | Path | None = None) -> None:
        """Rewrite the whole store sorted by digest."""
        path = Path(path or self.path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8", newline="\n") as fh:
            for d in sorted(self.entries):
                fh.write(json.dumps({"digest": d, "response_text": self.entries[d]}, ensure_ascii=False) + "\n")


def record_fixture(req: ChatRequest, resp: ChatResponse, store: FixtureStore) -> FixtureStore:
    store.add(cache_key(req), resp.text)
    return store


class Provider(Protocol):
    name: str

    def send(self, req: ChatRequest) -> str: ...


class ReplayProvider:
    name = "replay"

    def __init__(self, store: FixtureStore):
        self.store = store

    def send(self, req: ChatRequest) -> str:
        digest = cache_key(req)
        text = self.store.get(digest)
        if text is None:
            raise MissingFixtureError(f"no recorded reply for request digest {digest}")
        return text


class LiveProvider:
    """POSTs to ``{base_url}/chat/completions`` and returns the first choice."""

    name = "live"

    def __init__(self, base_url: str = DEFAULT_BASE_URL, api_key: str | None = None,
                 key_env: str = DEFAULT_KEY_ENV, timeout: float = 120.0,
                 policy: RetryPolicy | None = None, client: httpx.Client | None = None):
        api_key = api_key or os.environ.get(key_env)
        if not api_key:
            raise RuntimeError(f"live provider needs a credential in ${key_env}")
        self.url = base_url.rstrip("/") + "/chat/completions"
        self.policy = policy or RetryPolicy()
        self.client = client or httpx.Client(timeout=timeout)
        self.headers = {"Authorization": f"Bearer {api_key}", "User-Agent": USER_AGENT}

    def send(self, req: ChatRequest) -> str:
        body = {
            "model": req.model_name,
            "messages": req.wire_messages(),
            "temperature": req.temperature,
            "max_tokens": req.max_output_tokens,
        }
        resp = request_with_retry(self.client, "POST", self.url, json=body,
                                  headers=self.headers, policy=self.policy)
        try:
            content = resp.json()["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as e:
            raise MalformedResponseError(f"unexpected completion body: {resp.text[:200]}") from e
        return content or ""


class LLMClient:
    """Front door for completions: cache first, then the provider.

    ``max_in_flight`` bounds concurrent provider calls across threads.
    ``recorder`` (a FixtureStore) captures every provider reply.
    """

    def __init__(self, provider: Provider, cache: FixtureStore | None = None,
                 recorder: FixtureStore | None = None, max_in_flight: int = 4):
        self.provider = provider
        self.cache = cache
        self.recorder = recorder
        self._slots = threading.BoundedSemaphore(max_in_flight)
        self._lock = threading.Lock()
        self.digests: list[str] = []

    def complete(self, req: ChatRequest) -> ChatResponse:
        digest = cache_key(req)
        with self._lock:
            self.digests.append(digest)
        if self.cache is not None and digest in self.cache:
            text = self.cache.get(digest)
            if self.recorder is not None and self.recorder is not self.cache:
                self.recorder.add(digest, text)
            return ChatResponse(text, self.provider.name, cached=True)
        start = time.perf_counter()
        with self._slots:
            text = self.provider.send(req)
        latency = (time.perf_counter() - start) * 1000
        if self.cache is not None:
            self.cache.add(digest, text)
        if self.recorder is not None and self.recorder is not self.cache:
            self.recorder.add(digest, text)
        return ChatResponse(text, self.provider.name, cached=False, latency_ms=latency)

    def used_digests(self) -> list[str]:
        return sorted(set(self.digests))


def request_from_messages(model_name: str, messages: Iterable, temperature: float = 0.0,
                          max_output_tokens: int = 512) -> ChatRequest:
    return ChatRequest(model_name, tuple(messages), temperature, max_output_tokens)
