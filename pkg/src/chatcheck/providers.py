"""Chat-completion providers.

``OpenAICompatibleProvider`` speaks the public chat-completions JSON wire
protocol (POST {base_url}/chat/completions with a bearer key), so any
compatible endpoint works, hosted or local. ``ScriptedProvider`` replays
canned replies keyed by a request fingerprint for deterministic tests and
offline runs, and ``RecordingProvider`` captures live traffic into a
transcript file that the scripted provider can replay later.
"""
from __future__ import annotations

import hashlib
import json
import os
import random
import tempfile
import threading
import time
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple
from urllib.parse import urlparse

import requests

ROLES = ("system", "user", "assistant")


class ProviderError(Exception):
    """Base class for provider failures."""


class AuthError(ProviderError):
    """The endpoint rejected the credentials (401/403)."""


class RateLimited(ProviderError):
    """Still throttled (429) after the retry budget was spent."""


class TransportError(ProviderError):
    """Timeout, connection failure, or persistent 5xx."""


class MalformedProviderReply(ProviderError):
    """Reply did not carry choices[0].message.content."""


class UnscriptedRequest(ProviderError):
    """Scripted provider got a request with no transcript entry."""


@dataclass(frozen=True)
class ChatMessage:
    role: str
    content: str

    def __post_init__(self) -> None:
        if self.role not in ROLES:
            raise ValueError(f"role must be one of {ROLES}, got {self.role!r}")
        if self.content is None:
            raise ValueError("content must not be None")


@dataclass(frozen=True)
class ChatRequest:
    """One chat-completion call. ``temperature=None`` leaves the choice to
    the provider-side default."""

    model: str
    messages: Tuple[ChatMessage, ...]
    temperature: Optional[float] = None

    def __post_init__(self) -> None:
        if not self.model:
            raise ValueError("model identifier must be non-empty")
        if not self.messages:
            raise ValueError("messages must be non-empty")
        object.__setattr__(self, "messages", tuple(self.messages))
        if self.temperature is not None and not 0 <= self.temperature <= 2:
            raise ValueError(f"temperature must be in 0..2, got {self.temperature}")


@dataclass(frozen=True)
class ProviderConfig:
    base_url: str
    api_key: str = ""
    model: str = "gpt-3.5-turbo"
    request_timeout: float = 30.0
    max_retries: int = 3
    retry_base_delay: float = 0.5
    retry_factor: float = 2.0

    def __post_init__(self) -> None:
        parsed = urlparse(self.base_url)
        if parsed.scheme not in ("http", "https") or not parsed.netloc:
            raise ValueError(f"base_url is not a valid http(s) URL: {self.base_url!r}")
        if self.request_timeout <= 0:
            raise ValueError("request_timeout must be > 0")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")


def _temperature_token(temperature: Optional[float]) -> str:
    return "default" if temperature is None else format(float(temperature), ".6g")


def fingerprint(model: str, temperature: Optional[float], contents: Sequence[str]) -> str:
    """Stable fingerprint of (model, temperature, message contents)."""
    payload = "\x1f".join([model, _temperature_token(temperature), "\x1e".join(contents)])
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def request_fingerprint(request: ChatRequest) -> str:
    return fingerprint(request.model, request.temperature, [m.content for m in request.messages])


def request_summary(request: ChatRequest) -> str:
    last = request.messages[-1].content.replace("\n", " ")
    if len(last) > 120:
        last = last[:117] + "..."
    return (
        f"{len(request.messages)} message(s), "
        f"temperature={_temperature_token(request.temperature)}, last={last!r}"
    )


class OpenAICompatibleProvider:
    """Blocking client for chat-completions endpoints with retry/backoff.

    Transient failures (timeouts, connection errors, 429, 5xx) are retried
    up to ``max_retries`` times with exponential backoff and jitter. The
    API key is only ever placed in the Authorization header and is
    scrubbed from anything that could end up in an error message.
    """

    def __init__(self, config: ProviderConfig, session: Optional[requests.Session] = None):
        self.config = config
        if session is None:
            session = requests.Session()
            adapter = requests.adapters.HTTPAdapter(pool_connections=8, pool_maxsize=32)
            session.mount("http://", adapter)
            session.mount("https://", adapter)
        self._session = session
        self._rng = random.Random()

    def _redact(self, text: str) -> str:
        if self.config.api_key:
            return text.replace(self.config.api_key, "***")
        return text

    def _headers(self) -> Dict[str, str]:
        headers = {"Content-Type": "application/json"}
        if self.config.api_key:
            headers["Authorization"] = f"Bearer {self.config.api_key}"
        return headers

    def complete(self, request: ChatRequest) -> str:
        url = self.config.base_url.rstrip("/") + "/chat/completions"
        payload: Dict[str, object] = {
            "model": request.model,
            "messages": [{"role": m.role, "content": m.content} for m in request.messages],
        }
        if request.temperature is not None:
            payload["temperature"] = request.temperature

        cfg = self.config
        delay = cfg.retry_base_delay
        last_error: Optional[ProviderError] = None
        for attempt in range(cfg.max_retries + 1):
            try:
                resp = self._session.post(
                    url, json=payload, headers=self._headers(), timeout=cfg.request_timeout
                )
            except (requests.Timeout, requests.ConnectionError) as exc:
                last_error = TransportError(self._redact(f"transport failure: {exc}"))
            else:
                if resp.status_code == 200:
                    return self._parse_reply(resp)
                if resp.status_code in (401, 403):
                    raise AuthError(f"endpoint rejected credentials (HTTP {resp.status_code})")
                if resp.status_code == 429:
                    last_error = RateLimited("rate limited (HTTP 429)")
                elif 500 <= resp.status_code < 600:
                    last_error = TransportError(
                        self._redact(f"server error (HTTP {resp.status_code}): {resp.text[:200]}")
                    )
                else:
                    raise ProviderError(
                        self._redact(f"unexpected status {resp.status_code}: {resp.text[:200]}")
                    )
            if attempt < cfg.max_retries:
                time.sleep(delay + self._rng.uniform(0, delay / 2))
                delay *= cfg.retry_factor
        assert last_error is not None
        raise last_error

    def _parse_reply(self, resp: requests.Response) -> str:
        try:
            data = resp.json()
        except ValueError as exc:
            raise MalformedProviderReply(f"non-JSON reply: {exc}") from exc
        try:
            content = data["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError):
            raise MalformedProviderReply("reply missing choices[0].message.content") from None
        if not isinstance(content, str):
            raise MalformedProviderReply(f"content is {type(content).__name__}, not text")
        return content

    def ping(self, timeout: float = 2.0) -> bool:
        """Cheap reachability probe; any HTTP response counts as reachable."""
        url = self.config.base_url.rstrip("/") + "/models"
        try:
            self._session.get(url, headers=self._headers(), timeout=timeout)
            return True
        except requests.RequestException:
            return False


class ScriptedProvider:
    """Deterministic provider: replies come from a fingerprint-keyed map."""

    def __init__(self, transcript: Optional[Dict[str, str]] = None):
        self.transcript: Dict[str, str] = dict(transcript or {})

    @classmethod
    def from_file(cls, path: str) -> "ScriptedProvider":
        return cls(load_transcript(path))

    def script(self, request: ChatRequest, reply: str) -> None:
        self.transcript[request_fingerprint(request)] = reply

    def complete(self, request: ChatRequest) -> str:
        fp = request_fingerprint(request)
        if fp not in self.transcript:
            raise UnscriptedRequest(
                f"no transcript entry for fingerprint {fp} ({request_summary(request)})"
            )
        return self.transcript[fp]

    def ping(self, timeout: float = 2.0) -> bool:
        return True


class RecordingProvider:
    """Wraps a live provider and persists every exchange for later replay."""

    def __init__(self, inner, path: str):
        self.inner = inner
        self.path = path
        self._lock = threading.Lock()
        self._entries: List[Dict[str, str]] = []
        self._by_fingerprint: Dict[str, int] = {}
        if os.path.exists(path):
            for entry in _read_entries(path):
                self._by_fingerprint[entry["fingerprint"]] = len(self._entries)
                self._entries.append(entry)

    def complete(self, request: ChatRequest) -> str:
        reply = self.inner.complete(request)
        entry = {
            "fingerprint": request_fingerprint(request),
            "request_summary": request_summary(request),
            "reply": reply,
        }
        with self._lock:
            idx = self._by_fingerprint.get(entry["fingerprint"])
            if idx is None:
                self._by_fingerprint[entry["fingerprint"]] = len(self._entries)
                self._entries.append(entry)
            else:
                self._entries[idx] = entry
            _write_entries(self.path, self._entries)
        return reply

    def ping(self, timeout: float = 2.0) -> bool:
        return self.inner.ping(timeout)


def _read_entries(path: str) -> List[Dict[str, str]]:
    with open(path, "r", encoding="utf-8") as fp:
        data = json.load(fp)
    if not isinstance(data, list):
        raise ValueError(f"transcript {path} must be a JSON array of entries")
    for entry in data:
        if not isinstance(entry, dict) or "fingerprint" not in entry or "reply" not in entry:
            raise ValueError(f"transcript {path} has a malformed entry: {entry!r}")
    return data


def _write_entries(path: str, entries: List[Dict[str, str]]) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fp:
            json.dump(entries, fp, indent=2, ensure_ascii=False)
            fp.write("\n")
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)


def load_transcript(path: str) -> Dict[str, str]:
    """Load a transcript file into a fingerprint -> reply map."""
    return {entry["fingerprint"]: entry["reply"] for entry in _read_entries(path)}


def save_transcript(path: str, transcript: Dict[str, str], summaries: Optional[Dict[str, str]] = None) -> None:
    entries = [
        {
            "fingerprint": fp,
            "request_summary": (summaries or {}).get(fp, ""),
            "reply": reply,
        }
        for fp, reply in transcript.items()
    ]
    _write_entries(path, entries)
