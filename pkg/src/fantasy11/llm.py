"""Chat-completion access for every agent.

One live HTTP backend (chat-completions wire format, bounded retries) and a
deterministic fixture backend keyed by a stable request fingerprint, so any
pipeline run is replayable offline. A scripted backend serves tests that
need hand-sequenced conversations.
"""

from __future__ import annotations

import json
import re
import threading
import time
from dataclasses import dataclass
from hashlib import sha256
from pathlib import Path
from typing import Callable, Mapping, Optional, Protocol, Sequence

import requests

from .errors import BackendError, MalformedAfterRetriesError, MissingFixtureError

LIVE_KEY_ENV = "FANCRIC_LLM_KEY"

WORKER = "worker"
REVIEWER = "reviewer"


@dataclass(frozen=True, slots=True)
class Message:
    role: str  # system | user | assistant
    content: str


@dataclass(frozen=True, slots=True)
class TokenUsage:
    prompt: int = 0
    completion: int = 0


@dataclass(frozen=True, slots=True)
class ChatRequest:
    model_tag: str
    messages: tuple[Message, ...]
    temperature: float = 1.0
    max_tokens: Optional[int] = None

    def __post_init__(self):
        if not self.messages:
            raise BackendError("a chat request needs at least one message")
        if self.messages[0].role not in ("system", "user"):
            raise BackendError("first message must be system or user")
        if self.temperature < 0:
            raise BackendError("temperature must be >= 0")

    def extend(self, *extra: Message) -> "ChatRequest":
        return ChatRequest(self.model_tag, self.messages + tuple(extra),
                           self.temperature, self.max_tokens)


@dataclass(frozen=True, slots=True)
class ChatResponse:
    content: str
    model_used: str
    token_usage: TokenUsage = TokenUsage()
    latency_ms: float = 0.0


def make_request(
    model_tag: str,
    user: str,
    system: str = "",
    temperature: float = 1.0,
    max_tokens: Optional[int] = None,
) -> ChatRequest:
    messages: list[Message] = []
    if system:
        messages.append(Message("system", system))
    messages.append(Message("user", user))
    return ChatRequest(model_tag, tuple(messages), temperature, max_tokens)


def fingerprint_request(request: ChatRequest) -> str:
    """16-hex-char fingerprint of (model_tag, messages) only.

    Sampling knobs and timing never affect the key, so fixtures survive
    temperature changes and unrelated request ordering.
    """
    canonical = json.dumps(
        [request.model_tag, [[m.role, m.content] for m in request.messages]],
        sort_keys=True,
        ensure_ascii=True,
        separators=(",", ":"),
    )
    return sha256(canonical.encode("utf-8")).hexdigest()[:16]


class Backend(Protocol):
    def send(self, request: ChatRequest) -> ChatResponse: ...


def send_chat(request: ChatRequest, backend: Backend) -> ChatResponse:
    """Round-trip one request through whichever backend is configured."""
    return backend.send(request)


class MockBackend:
    """Serves fixture files ``<dir>/<fingerprint>.txt``; fails loudly when a
    fingerprint has no fixture. Responses are byte-deterministic."""

    def __init__(self, fixtures_dir: str | Path, max_concurrency: int = 4):
        self.fixtures_dir = Path(fixtures_dir)
        self._gate = threading.Semaphore(max_concurrency)

    def send(self, request: ChatRequest) -> ChatResponse:
        fp = fingerprint_request(request)
        path = self.fixtures_dir / f"{fp}.txt"
        with self._gate:
            if not path.is_file():
                last_user = next(
                    (m.content for m in reversed(request.messages) if m.role == "user"),
                    "",
                )
                raise MissingFixtureError(fp, f"model={request.model_tag} "
                                              f"prompt starts: {last_user[:80]!r}")
            content = path.read_text(encoding="utf-8")
        return ChatResponse(
            content=content,
            model_used=f"mock:{request.model_tag}",
            token_usage=TokenUsage(),
            latency_ms=0.0,
        )


class ScriptedBackend:
    """Returns canned contents in order; records every request it saw."""

    def __init__(self, contents: Sequence[str]):
        self._contents = list(contents)
        self._cursor = 0
        self.requests: list[ChatRequest] = []
        self._lock = threading.Lock()

    def send(self, request: ChatRequest) -> ChatResponse:
        with self._lock:
            self.requests.append(request)
            if self._cursor >= len(self._contents):
                raise BackendError("scripted backend ran out of responses")
            content = self._contents[self._cursor]
            self._cursor += 1
        return ChatResponse(content, f"scripted:{request.model_tag}")


class LiveBackend:
    """Chat-completions-compatible HTTP backend with exponential backoff."""

    RETRIABLE_STATUS = frozenset({408, 429, 500, 502, 503, 504})

    def __init__(
        self,
        base_url: str,
        api_key: str,
        model_map: Mapping[str, str],
        *,
        max_retries: int = 3,
        backoff_s: float = 0.5,
        timeout_s: float = 60.0,
        max_concurrency: int = 4,
        session: Optional[requests.Session] = None,
    ):
        self.base_url = base_url.rstrip("/")
        self.api_key = api_key
        self.model_map = dict(model_map)
        self.max_retries = max_retries
        self.backoff_s = backoff_s
        self.timeout_s = timeout_s
        self.session = session or requests.Session()
        self._gate = threading.Semaphore(max_concurrency)

    def send(self, request: ChatRequest) -> ChatResponse:
        model = self.model_map.get(request.model_tag, request.model_tag)
        payload = {
            "model": model,
            "messages": [{"role": m.role, "content": m.content} for m in request.messages],
            "temperature": request.temperature,
        }
        if request.max_tokens is not None:
            payload["max_tokens"] = request.max_tokens
        url = f"{self.base_url}/chat/completions"
        headers = {"Authorization": f"Bearer {self.api_key}"}
        last_error = "no attempt made"
        for attempt in range(self.max_retries):
            if attempt:
                time.sleep(self.backoff_s * (2 ** (attempt - 1)))
            started = time.monotonic()
            try:
                with self._gate:
                    resp = self.session.post(
                        url, json=payload, headers=headers, timeout=self.timeout_s
                    )
            except requests.RequestException as exc:
                last_error = f"transport error: {exc}"
                continue
            if resp.status_code in (401, 403):
                raise BackendError(f"authentication failed ({resp.status_code})")
            if resp.status_code in self.RETRIABLE_STATUS:
                last_error = f"HTTP {resp.status_code}"
                continue
            if resp.status_code != 200:
                raise BackendError(f"HTTP {resp.status_code}: {resp.text[:200]}")
            body = resp.json()
            try:
                choice = body["choices"][0]
                content = choice["message"]["content"]
            except (KeyError, IndexError, TypeError):
                raise BackendError(f"malformed completion payload: {body}") from None
            if choice.get("finish_reason") == "length":
                raise BackendError("response truncated (finish_reason=length)")
            usage = body.get("usage", {})
            return ChatResponse(
                content=content,
                model_used=body.get("model", model),
                token_usage=TokenUsage(
                    int(usage.get("prompt_tokens", 0)),
                    int(usage.get("completion_tokens", 0)),
                ),
                latency_ms=(time.monotonic() - started) * 1000.0,
            )
        raise BackendError(f"gave up after {self.max_retries} attempts ({last_error})")


class RecordingBackend:
    """Wraps any backend and mirrors responses into a fixture directory, so
    a later MockBackend over the same directory replays the session."""

    def __init__(self, inner: Backend, record_dir: str | Path):
        self.inner = inner
        self.record_dir = Path(record_dir)
        self.record_dir.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def send(self, request: ChatRequest) -> ChatResponse:
        response = self.inner.send(request)
        fp = fingerprint_request(request)
        last_user = next(
            (m.content for m in reversed(request.messages) if m.role == "user"), ""
        )
        summary = " ".join(last_user.split())[:100]
        with self._lock:
            (self.record_dir / f"{fp}.txt").write_text(response.content, encoding="utf-8")
            index = self.record_dir / "index.tsv"
            line = f"{fp}\t{request.model_tag}\t{summary}\n"
            existing = index.read_text(encoding="utf-8") if index.exists() else ""
            if not any(row.startswith(fp + "\t") for row in existing.splitlines()):
                with open(index, "a", encoding="utf-8") as fh:
                    fh.write(line)
        return response


_FENCE_RE = re.compile(r"```(?:[a-zA-Z0-9_-]+)?\s*\n(.*?)```", re.DOTALL)


def extract_payload(text: str) -> Optional[object]:
    """First structured payload in a response: fenced block if present,
    otherwise the first parseable JSON object in the raw text."""
    for block in _FENCE_RE.findall(text):
        try:
            return json.loads(block.strip())
        except json.JSONDecodeError:
            continue
    decoder = json.JSONDecoder()
    for start in (m.start() for m in re.finditer(r"[{\[]", text)):
        try:
            obj, _ = decoder.raw_decode(text, start)
            return obj
        except json.JSONDecodeError:
            continue
    return None


@dataclass(frozen=True)
class PayloadDescriptor:
    """Required fields (name -> python type) plus an optional semantic check
    returning a list of problems."""

    fields: Mapping[str, type | tuple[type, ...]]
    check: Optional[Callable[[dict], list[str]]] = None
    reply_hint: str = ""

    def problems(self, payload: object) -> list[str]:
        if not isinstance(payload, dict):
            return [f"expected a JSON object, got {type(payload).__name__}"]
        out: list[str] = []
        for name, kind in self.fields.items():
            if name not in payload:
                out.append(f"missing field {name!r}")
                continue
            value = payload[name]
            if isinstance(value, bool) and kind is int:
                out.append(f"field {name!r} must be an integer")
            elif not isinstance(value, kind):
                expected = kind.__name__ if isinstance(kind, type) else "/".join(
                    k.__name__ for k in kind
                )
                out.append(f"field {name!r} must be {expected}")
        if not out and self.check is not None:
            out.extend(self.check(payload))
        return out

    def field_summary(self) -> str:
        names = ", ".join(self.fields)
        return self.reply_hint or f"a single JSON object with fields: {names}"


def complete_structured(
    request: ChatRequest,
    descriptor: PayloadDescriptor,
    backend: Backend,
    max_attempts: int = 3,
    observer: Optional[Callable[[ChatRequest, ChatResponse], None]] = None,
    retry_gate: Optional[Callable[[], bool]] = None,
) -> dict:
    """Send, extract, validate; on failure re-prompt with the validation
    error appended. Never makes more than ``max_attempts`` LLM calls.

    ``retry_gate`` is consulted before every call after the first; when it
    returns False the retry budget is considered spent and the failure is
    raised immediately (callers use this for shared retry pools).
    """
    if max_attempts < 1:
        raise BackendError("max_attempts must be >= 1")
    current = request
    raw: list[str] = []
    problems: list[str] = ["no attempt made"]
    for attempt in range(max_attempts):
        if attempt and retry_gate is not None and not retry_gate():
            break
        response = backend.send(current)
        if observer is not None:
            observer(current, response)
        raw.append(response.content)
        payload = extract_payload(response.content)
        if payload is None:
            problems = ["no JSON payload found in the reply"]
        else:
            problems = descriptor.problems(payload)
            if not problems:
                return payload  # type: ignore[return-value]
        current = current.extend(
            Message("assistant", response.content),
            Message(
                "user",
                "Your reply could not be used: "
                + "; ".join(problems)
                + ". Respond again with "
                + descriptor.field_summary()
                + " and no other text.",
            ),
        )
    raise MalformedAfterRetriesError(problems, raw)
