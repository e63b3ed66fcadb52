"""Client for the external model backends (NER, POS, masked-LM, translation).

One gateway fronts all four capabilities with shared behavior: canonical
request digests, an on-disk response cache (atomic write-temp-then-rename),
exponential-backoff retries, a per-capability in-flight bound, and a replay
backend (`fixture://<dir>`) that serves recorded responses for offline runs.
"""

from __future__ import annotations

import json
import os
import tempfile
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping, Sequence

import requests

from .protocol import (
    Capability,
    MaskCandidate,
    NerSpan,
    ProtocolError,
    canonical_body,
    fill_mask_request,
    ner_request,
    parse_error_response,
    parse_fill_mask_response,
    parse_ner_response,
    parse_pos_response,
    parse_translate_response,
    pos_request,
    request_digest,
    translate_request,
)
from .records import LANGUAGES

DEFAULT_TIMEOUT_MS = 30_000
DEFAULT_MAX_RETRIES = 4
DEFAULT_MAX_IN_FLIGHT = 8
BACKOFF_START_MS = 250
BACKOFF_FACTOR = 2

ENV_PREFIX = "GS_BACKEND_"

# Statuses worth retrying; 4xx protocol errors are deterministic and are not.
_RETRY_STATUSES = {429, 500, 502, 503, 504}


class GatewayError(RuntimeError):
    """Stage-fatal backend failure, carrying the request digest."""

    def __init__(self, code: str, message: str, capability: str = "", request_id: str = ""):
        detail = f"[{capability}:{request_id[:12]}] " if request_id else ""
        super().__init__(f"{detail}{code}: {message}")
        self.code = code
        self.message = message
        self.capability = capability
        self.request_id = request_id


@dataclass(frozen=True)
class BackendEndpoint:
    capability: Capability
    base_url: str
    timeout_ms: int = DEFAULT_TIMEOUT_MS
    max_retries: int = DEFAULT_MAX_RETRIES

    def __post_init__(self) -> None:
        if self.timeout_ms <= 0:
            raise ValueError("timeout must be positive")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")


class HttpBackend:
    """POSTs canonical JSON to a live backend, with backoff retries."""

    def __init__(
        self,
        base_url: str,
        timeout_ms: int = DEFAULT_TIMEOUT_MS,
        max_retries: int = DEFAULT_MAX_RETRIES,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.base_url = base_url.rstrip("/")
        self.timeout_ms = timeout_ms
        self.max_retries = max_retries
        self.model_identities: dict[str, str] = {}
        self._sleep = sleep

    @property
    def identity(self) -> str:
        return self.base_url

    def fetch(self, capability: Capability, body: dict, digest: str) -> bytes:
        url = self.base_url + capability.path
        payload = canonical_body(body)
        delay = BACKOFF_START_MS / 1000.0
        last_error = "unreachable"
        for attempt in range(self.max_retries + 1):
            try:
                resp = requests.post(
                    url,
                    data=payload,
                    headers={"Content-Type": "application/json"},
                    timeout=self.timeout_ms / 1000.0,
                )
            except requests.RequestException as exc:
                last_error = str(exc)
            else:
                if resp.status_code < 400:
                    model = resp.headers.get("X-Model-Identity")
                    if model:
                        self.model_identities[capability.value] = model
                    return resp.content
                if resp.status_code not in _RETRY_STATUSES:
                    code, message = _error_from_body(resp.content)
                    raise GatewayError(code, message, capability.value, digest)
                last_error = f"status {resp.status_code}"
            if attempt < self.max_retries:
                self._sleep(delay)
                delay *= BACKOFF_FACTOR
        raise GatewayError("unreachable", last_error, capability.value, digest)


def _error_from_body(content: bytes) -> tuple[str, str]:
    try:
        return parse_error_response(json.loads(content.decode("utf-8")))
    except (ValueError, UnicodeDecodeError):
        return "backend_error", content.decode("utf-8", errors="replace")[:200]


class FixtureBackend:
    """Replays canned responses from <root>/<capability>/<digest>.json."""

    def __init__(self, root: Path | str):
        self.root = Path(root)
        self.request_log: list[tuple[Capability, str]] = []
        self._lock = threading.Lock()

    @property
    def identity(self) -> str:
        return f"fixture://{self.root}"

    def fetch(self, capability: Capability, body: dict, digest: str) -> bytes:
        with self._lock:
            self.request_log.append((capability, digest))
        path = self.root / capability.value / f"{digest}.json"
        if not path.is_file():
            raise GatewayError(
                "fixture_miss", f"no fixture at {path}", capability.value, digest
            )
        return path.read_bytes()


def make_backend(
    url: str,
    timeout_ms: int = DEFAULT_TIMEOUT_MS,
    max_retries: int = DEFAULT_MAX_RETRIES,
    sleep: Callable[[float], None] = time.sleep,
):
    if url.startswith("fixture://"):
        return FixtureBackend(url[len("fixture://") :])
    if url.startswith("http://") or url.startswith("https://"):
        return HttpBackend(url, timeout_ms, max_retries, sleep)
    raise ValueError(f"unsupported backend url scheme: {url}")


def resolve_backend_urls(config_urls: Mapping[str, str]) -> dict[Capability, str]:
    """Apply GS_BACKEND_<CAPABILITY>_URL env overrides to configured urls."""
    urls: dict[Capability, str] = {}
    for cap in Capability:
        env_name = f"{ENV_PREFIX}{cap.name}_URL"
        url = os.environ.get(env_name) or config_urls.get(cap.value, "")
        if not url:
            raise ValueError(f"no backend url for {cap.value}; set {env_name}")
        urls[cap] = url
    return urls


class ResponseCache:
    """Per-run response store keyed by (capability, request digest)."""

    def __init__(self, root: Path | str):
        self.root = Path(root)

    def path_for(self, capability: Capability, digest: str) -> Path:
        return self.root / capability.value / f"{digest}.json"

    def get(self, capability: Capability, digest: str) -> bytes | None:
        path = self.path_for(capability, digest)
        if path.is_file():
            return path.read_bytes()
        return None

    def put(self, capability: Capability, digest: str, data: bytes) -> None:
        path = self.path_for(capability, digest)
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp_name = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(data)
            os.replace(tmp_name, path)
        except BaseException:
            if os.path.exists(tmp_name):
                os.unlink(tmp_name)
            raise


@dataclass
class CapabilityCounters:
    requests: int = 0
    cache_hits: int = 0
    backend_calls: int = 0

    def to_json(self) -> dict:
        return dict(self.__dict__)


class ModelGateway:
    """Typed entry points over the wire protocol, thread-safe."""

    def __init__(
        self,
        backends: Mapping[Capability, object],
        cache: ResponseCache | None = None,
        max_in_flight: int = DEFAULT_MAX_IN_FLIGHT,
    ):
        self._backends = dict(backends)
        self._cache = cache
        self._slots = {cap: threading.Semaphore(max_in_flight) for cap in Capability}
        self._lock = threading.Lock()
        self.counters = {cap: CapabilityCounters() for cap in Capability}

    @classmethod
    def from_urls(
        cls,
        urls: Mapping[Capability, str],
        cache_dir: Path | str | None = None,
        timeout_ms: int = DEFAULT_TIMEOUT_MS,
        max_retries: int = DEFAULT_MAX_RETRIES,
        max_in_flight: int = DEFAULT_MAX_IN_FLIGHT,
        sleep: Callable[[float], None] = time.sleep,
    ) -> "ModelGateway":
        by_url: dict[str, object] = {}
        backends = {}
        for cap, url in urls.items():
            if url not in by_url:
                by_url[url] = make_backend(url, timeout_ms, max_retries, sleep)
            backends[cap] = by_url[url]
        cache = ResponseCache(cache_dir) if cache_dir is not None else None
        return cls(backends, cache, max_in_flight)

    def identities(self) -> dict[str, str]:
        out = {}
        for cap, backend in self._backends.items():
            identity = backend.identity
            model = getattr(backend, "model_identities", {}).get(cap.value)
            out[cap.value] = f"{identity} ({model})" if model else identity
        return out

    def _call(self, capability: Capability, body: dict) -> dict:
        digest = request_digest(body)
        counters = self.counters[capability]
        with self._lock:
            counters.requests += 1
        if self._cache is not None:
            cached = self._cache.get(capability, digest)
            if cached is not None:
                with self._lock:
                    counters.cache_hits += 1
                return self._parse_json(cached, capability, digest)
        backend = self._backends[capability]
        with self._slots[capability]:
            with self._lock:
                counters.backend_calls += 1
            data = backend.fetch(capability, body, digest)
        if self._cache is not None:
            self._cache.put(capability, digest, data)
        return self._parse_json(data, capability, digest)

    @staticmethod
    def _parse_json(data: bytes, capability: Capability, digest: str) -> dict:
        try:
            body = json.loads(data.decode("utf-8"))
        except (ValueError, UnicodeDecodeError) as exc:
            raise GatewayError("protocol", f"response not JSON: {exc}", capability.value, digest)
        if not isinstance(body, dict):
            raise GatewayError("protocol", "response not an object", capability.value, digest)
        return body

    def ner_tag(self, tokens: Sequence[str]) -> list[NerSpan]:
        if not tokens:
            raise ValueError("ner_tag requires a non-empty token list")
        body = ner_request(tokens)
        return self._parsed(Capability.NER, body, lambda b: parse_ner_response(b, len(tokens)))

    def pos_tag(self, tokens: Sequence[str]) -> list[str]:
        if not tokens:
            raise ValueError("pos_tag requires a non-empty token list")
        body = pos_request(tokens)
        return self._parsed(Capability.POS, body, lambda b: parse_pos_response(b, len(tokens)))

    def fill_mask(
        self, tokens: Sequence[str], mask_index: int, top_k: int
    ) -> list[MaskCandidate]:
        if top_k < 1:
            raise ValueError("top_k must be >= 1")
        if not (0 <= mask_index < len(tokens)):
            raise ValueError(f"mask_index {mask_index} out of range")
        body = fill_mask_request(tokens, mask_index, top_k)
        return self._parsed(
            Capability.FILL_MASK, body, lambda b: parse_fill_mask_response(b, top_k)
        )

    def translate(self, text: str, target_language: str) -> str:
        if not text:
            raise ValueError("translate requires non-empty text")
        if target_language not in LANGUAGES:
            raise ValueError(f"unsupported target language: {target_language}")
        body = translate_request(text, target_language)
        return self._parsed(Capability.TRANSLATE, body, parse_translate_response)

    def _parsed(self, capability: Capability, body: dict, parse):
        digest = request_digest(body)
        response = self._call(capability, body)
        try:
            return parse(response)
        except ProtocolError as exc:
            raise GatewayError(exc.code, exc.message, capability.value, digest)
