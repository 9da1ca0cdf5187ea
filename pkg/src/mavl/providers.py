"""Model access layer: request shapes, retries, tracing, and test doubles.

Everything the translation pipeline needs from a model is narrowed to two
operations: complete a prompt (optionally with attached media) and embed a
batch of texts.  Real backends sit behind :class:`RemoteProvider`; tests and
offline runs use :class:`ScriptedProvider` and :class:`HashEmbeddingProvider`,
which are fully deterministic.

Retries live here rather than in each provider so that every backend gets the
same policy: exponential backoff, a hard cap on total attempts, and immediate
give-up on errors marked non-retryable (bad credentials will not fix
themselves).  The sleeper is injectable so tests never actually wait.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Iterable, Protocol, Sequence

from .errors import (
    ConfigError,
    EmbeddingError,
    ProviderAuthError,
    ProviderError,
    ProviderRateLimitError,
    ProviderTimeoutError,
    RetriesExhaustedError,
    TransientProviderError,
)

__all__ = [
    "GenerationConfig",
    "QWEN_CONFIG",
    "MediaKind",
    "MediaAttachment",
    "GenerationRequest",
    "EmbeddingRequest",
    "GenerationProvider",
    "EmbeddingProvider",
    "RetryPolicy",
    "TraceStore",
    "generate",
    "embed",
    "ScriptedProvider",
    "HashEmbeddingProvider",
    "RemoteProvider",
    "request_digest",
    "map_bounded",
]


# ---------------------------------------------------------------------------
# Request shapes


@dataclass(frozen=True)
class GenerationConfig:
    """Sampling knobs passed through to the backend.

    Defaults match the settings we use for the main translation model;
    ``QWEN_CONFIG`` below is the preset for the open-weights alternative,
    which wants a presence penalty instead of top-k.
    """

    temperature: float = 0.6
    top_p: float = 0.95
    top_k: int | None = 40
    max_output_tokens: int = 8192
    presence_penalty: float | None = None

    def __post_init__(self) -> None:
        if self.temperature < 0.0:
            raise ConfigError(f"temperature must be >= 0, got {self.temperature}")
        if not 0.0 < self.top_p <= 1.0:
            raise ConfigError(f"top_p must be in (0, 1], got {self.top_p}")
        if self.top_k is not None and self.top_k < 1:
            raise ConfigError(f"top_k must be >= 1, got {self.top_k}")
        if self.max_output_tokens < 1:
            raise ConfigError("max_output_tokens must be >= 1")


QWEN_CONFIG = GenerationConfig(
    temperature=0.7,
    top_p=0.8,
    top_k=None,
    max_output_tokens=4096,
    presence_penalty=1.05,
)


class MediaKind(Enum):
    AUDIO = "audio"
    VIDEO = "video"


@dataclass(frozen=True)
class MediaAttachment:
    """A pointer to an audio or video excerpt to send alongside the prompt.

    ``time_span`` is (start, end) in seconds within the referenced file; None
    means the whole file.  Attachments carry locations, not bytes; the
    provider decides how to fetch or upload them.
    """

    kind: MediaKind
    location: str
    time_span: tuple[float, float] | None = None

    def __post_init__(self) -> None:
        if not self.location:
            raise ConfigError("media attachment needs a location")
        if self.time_span is not None:
            start, end = self.time_span
            if start < 0 or end < start:
                raise ConfigError(f"bad time span {self.time_span!r}")

    def widened(self, margin: float) -> "MediaAttachment":
        """Pad the span by ``margin`` seconds on both sides (floor at zero)."""
        if self.time_span is None or margin <= 0:
            return self
        start, end = self.time_span
        return replace(self, time_span=(max(0.0, start - margin), end + margin))


@dataclass(frozen=True)
class GenerationRequest:
    prompt_text: str
    media: tuple[MediaAttachment, ...] = ()
    config: GenerationConfig = field(default_factory=GenerationConfig)

    def __post_init__(self) -> None:
        if not self.prompt_text.strip():
            raise ConfigError("prompt_text must be non-empty")


@dataclass(frozen=True)
class EmbeddingRequest:
    texts: tuple[str, ...]
    model_id: str = "default"

    def __post_init__(self) -> None:
        if not self.texts:
            raise EmbeddingError("embedding request needs at least one text")


def request_digest(request: GenerationRequest | EmbeddingRequest) -> str:
    """Stable short fingerprint of a request, for trace correlation."""
    if isinstance(request, GenerationRequest):
        payload = {
            "prompt": request.prompt_text,
            "media": [
                [m.kind.value, m.location, list(m.time_span) if m.time_span else None]
                for m in request.media
            ],
            "config": [
                request.config.temperature,
                request.config.top_p,
                request.config.top_k,
                request.config.max_output_tokens,
                request.config.presence_penalty,
            ],
        }
    else:
        payload = {"texts": list(request.texts), "model": request.model_id}
    blob = json.dumps(payload, ensure_ascii=False, sort_keys=True)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


# ---------------------------------------------------------------------------
# Provider protocols


class GenerationProvider(Protocol):
    """One raw completion attempt.  Retry logic lives outside."""

    name: str

    def complete(self, request: GenerationRequest) -> str: ...


class EmbeddingProvider(Protocol):
    name: str

    def embed_batch(self, request: EmbeddingRequest) -> list[list[float]]: ...


# ---------------------------------------------------------------------------
# Retry policy and call tracing


@dataclass(frozen=True)
class RetryPolicy:
    """``max_attempts`` counts every try, including the first one."""

    max_attempts: int = 3
    base_delay: float = 0.5
    multiplier: float = 2.0
    sleeper: Callable[[float], None] = time.sleep

    def __post_init__(self) -> None:
        if self.max_attempts < 1:
            raise ConfigError("max_attempts must be >= 1")
        if self.base_delay < 0 or self.multiplier < 1.0:
            raise ConfigError("backoff parameters out of range")

    def delay_for(self, attempt: int) -> float:
        """Delay after the given 1-based attempt fails."""
        return self.base_delay * self.multiplier ** (attempt - 1)


class TraceStore:
    """Append-only JSONL log of raw model exchanges.

    One line per attempt: task id, attempt number, request digest, response
    text, and wall-clock timestamps.  Reports never read this file; it exists
    for auditing and for replaying a run by hand.  Writes are serialized with
    a lock so concurrent workers interleave whole lines, never fragments.
    """

    def __init__(self, path: str, clock: Callable[[], float] = time.time) -> None:
        self.path = path
        self._clock = clock
        self._lock = threading.Lock()

    def append(
        self,
        task_id: str,
        attempt: int,
        digest: str,
        response_text: str,
        *,
        started: float | None = None,
    ) -> None:
        now = self._clock()
        record = {
            "task_id": task_id,
            "attempt": attempt,
            "request_digest": digest,
            "response_text": response_text,
            "started_at": started if started is not None else now,
            "finished_at": now,
        }
        line = json.dumps(record, ensure_ascii=False)
        with self._lock:
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(line + "\n")

    def read_all(self) -> list[dict]:
        with open(self.path, encoding="utf-8") as fh:
            return [json.loads(line) for line in fh if line.strip()]


def _with_retries(call, policy: RetryPolicy):
    last: ProviderError | None = None
    for attempt in range(1, policy.max_attempts + 1):
        try:
            return call(attempt)
        except ProviderError as exc:
            if not exc.retryable:
                raise
            last = exc
            if attempt < policy.max_attempts:
                policy.sleeper(policy.delay_for(attempt))
    assert last is not None
    raise RetriesExhaustedError(
        f"gave up after {policy.max_attempts} attempt(s): {last}",
        policy.max_attempts,
        last,
    )


def generate(
    request: GenerationRequest,
    provider: GenerationProvider,
    *,
    policy: RetryPolicy | None = None,
    trace: TraceStore | None = None,
    task_id: str = "",
) -> str:
    """Run one completion with retries, logging every attempt if tracing."""
    policy = policy or RetryPolicy()
    digest = request_digest(request)

    def attempt_once(attempt: int) -> str:
        started = trace._clock() if trace is not None else 0.0
        text = provider.complete(request)
        if trace is not None:
            trace.append(task_id, attempt, digest, text, started=started)
        return text

    return _with_retries(attempt_once, policy)


def embed(
    request: EmbeddingRequest,
    provider: EmbeddingProvider,
    *,
    policy: RetryPolicy | None = None,
) -> list[list[float]]:
    """Embed a batch with retries; enforces one equal-length vector per text."""
    policy = policy or RetryPolicy()

    def attempt_once(attempt: int) -> list[list[float]]:
        return provider.embed_batch(request)

    vectors = _with_retries(attempt_once, policy)
    if len(vectors) != len(request.texts):
        raise EmbeddingError(
            f"provider returned {len(vectors)} vectors for {len(request.texts)} texts"
        )
    dims = {len(v) for v in vectors}
    if len(dims) > 1:
        raise EmbeddingError(f"inconsistent embedding dimensions in batch: {sorted(dims)}")
    return vectors


# ---------------------------------------------------------------------------
# Deterministic providers


class ScriptedProvider:
    """Replays canned responses; raises canned exceptions.

    The script maps a task key to a list of turns, each either a response
    string or an exception instance to raise.  Keys are matched against the
    prompt: the first script key found as a substring of the prompt text
    selects that task's queue.  A ``None`` key (or no match) falls through to
    the default queue.  Queues are consumed in order and running past the end
    is a hard error, so tests notice extra calls.
    """

    def __init__(
        self,
        script: dict[str | None, Sequence[str | Exception]] | Sequence[str | Exception],
        *,
        name: str = "scripted",
    ) -> None:
        self.name = name
        if isinstance(script, dict):
            self._queues = {key: list(turns) for key, turns in script.items()}
        else:
            self._queues = {None: list(script)}
        self._lock = threading.Lock()
        self.calls = 0

    def _queue_for(self, prompt: str) -> list[str | Exception]:
        for key, queue in self._queues.items():
            if key is not None and key in prompt:
                return queue
        if None in self._queues:
            return self._queues[None]
        raise ProviderError("no script entry matches this prompt")

    def complete(self, request: GenerationRequest) -> str:
        with self._lock:
            self.calls += 1
            queue = self._queue_for(request.prompt_text)
            if not queue:
                raise ProviderError("script exhausted")
            turn = queue.pop(0)
        if isinstance(turn, Exception):
            raise turn
        return turn


class HashEmbeddingProvider:
    """Embeddings from character n-gram hashing.  No model, no network.

    Each text is mapped to a fixed-dimension bag of 1- to 3-grams, bucketed
    by CRC32 and L2-normalized.  Identical texts always get identical
    vectors, and a one-character edit moves the vector, which is all the
    offline evaluation path needs.
    """

    def __init__(self, dim: int = 128, *, name: str = "hash-ngram") -> None:
        if dim < 8:
            raise ConfigError("embedding dimension too small to be useful")
        self.dim = dim
        self.name = name

    def _vector(self, text: str) -> list[float]:
        import zlib

        vec = [0.0] * self.dim
        if not text:
            vec[0] = 1.0
            return vec
        for n in (1, 2, 3):
            for i in range(len(text) - n + 1):
                gram = text[i : i + n]
                bucket = zlib.crc32(gram.encode("utf-8")) % self.dim
                vec[bucket] += 1.0
        norm = sum(x * x for x in vec) ** 0.5
        return [x / norm for x in vec]

    def embed_batch(self, request: EmbeddingRequest) -> list[list[float]]:
        return [self._vector(t) for t in request.texts]


# ---------------------------------------------------------------------------
# Remote backend


class RemoteProvider:
    """HTTP backend for both completion and embedding.

    Credentials come from the environment (never from config files): the
    variable named by ``api_key_env`` must hold the key.  The transport is a
    plain callable so tests can substitute a fake without touching sockets.
    """

    def __init__(
        self,
        endpoint: str,
        model_id: str,
        *,
        api_key_env: str = "MAVL_API_KEY",
        name: str | None = None,
        timeout: float = 60.0,
        transport: Callable[..., "object"] | None = None,
    ) -> None:
        self.endpoint = endpoint.rstrip("/")
        self.model_id = model_id
        self.api_key_env = api_key_env
        self.name = name if name is not None else model_id
        self.timeout = timeout
        self._transport = transport

    def _api_key(self) -> str:
        key = os.environ.get(self.api_key_env, "")
        if not key:
            raise ProviderAuthError(
                f"no API key: set the {self.api_key_env} environment variable"
            )
        return key

    def _post(self, path: str, payload: dict) -> dict:
        headers = {"Authorization": f"Bearer {self._api_key()}"}
        if self._transport is not None:
            response = self._transport(
                self.endpoint + path, json=payload, headers=headers, timeout=self.timeout
            )
        else:
            import requests

            try:
                response = requests.post(
                    self.endpoint + path, json=payload, headers=headers, timeout=self.timeout
                )
            except requests.Timeout as exc:
                raise ProviderTimeoutError(str(exc)) from exc
            except requests.RequestException as exc:
                raise TransientProviderError(str(exc)) from exc
        status = getattr(response, "status_code", 200)
        if status in (401, 403):
            raise ProviderAuthError(f"authentication rejected (HTTP {status})")
        if status == 429:
            raise ProviderRateLimitError("rate limited (HTTP 429)")
        if status >= 500:
            raise TransientProviderError(f"server error (HTTP {status})")
        if status >= 400:
            raise ProviderError(f"request rejected (HTTP {status})")
        return response.json()

    def complete(self, request: GenerationRequest) -> str:
        cfg = request.config
        payload: dict = {
            "model": self.model_id,
            "prompt": request.prompt_text,
            "temperature": cfg.temperature,
            "top_p": cfg.top_p,
            "max_output_tokens": cfg.max_output_tokens,
        }
        if cfg.top_k is not None:
            payload["top_k"] = cfg.top_k
        if cfg.presence_penalty is not None:
            payload["presence_penalty"] = cfg.presence_penalty
        if request.media:
            payload["media"] = [
                {
                    "kind": m.kind.value,
                    "location": m.location,
                    "time_span": list(m.time_span) if m.time_span else None,
                }
                for m in request.media
            ]
        body = self._post("/complete", payload)
        try:
            return body["text"]
        except (KeyError, TypeError) as exc:
            raise ProviderError(f"malformed completion response: {body!r}") from exc

    def embed_batch(self, request: EmbeddingRequest) -> list[list[float]]:
        body = self._post(
            "/embed", {"model": request.model_id, "texts": list(request.texts)}
        )
        try:
            return [list(map(float, v)) for v in body["vectors"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise EmbeddingError(f"malformed embedding response: {body!r}") from exc


# ---------------------------------------------------------------------------
# Bounded fan-out


def map_bounded(fn: Callable, items: Iterable, parallelism: int = 1) -> list:
    """Apply ``fn`` to each item with at most ``parallelism`` in flight.

    Results come back in input order.  ``parallelism=1`` degenerates to a
    plain loop, which keeps single-threaded runs exactly reproducible.
    """
    items = list(items)
    if parallelism < 1:
        raise ConfigError("parallelism must be >= 1")
    if parallelism == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=parallelism) as pool:
        return list(pool.map(fn, items))
