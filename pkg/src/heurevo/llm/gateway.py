"""Chat-completion gateway: live HTTP, record/replay cache, scripted mock.

Every completion funnels through Gateway.complete_chat, which returns a
ChatExchange and maintains session token totals. The replay cache is
content-addressed by a digest of (messages, temperature), so a run
recorded once can be re-executed bit-identically with no network.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable

from heurevo.core.journal import canonical_json
from heurevo.core.types import JournalEvent
from heurevo.errors import GatewayError

Message = tuple[str, str]

ROLES = ("system", "user")
MODES = ("live", "record", "replay", "mock")

# Backoff schedule between live retries, seconds.
RETRY_BACKOFF = (1.0, 4.0, 16.0)


def prompt_digest(messages: Iterable[Message], temperature: float) -> str:
    """Stable hash of (messages, temperature)."""
    body = canonical_json(
        {"messages": [[r, t] for r, t in messages], "temperature": temperature}
    )
    return hashlib.sha256(body.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class ChatExchange:
    messages: tuple[Message, ...]
    temperature: float
    response: str
    context_tokens: int
    generation_tokens: int
    provider: str
    prompt_digest: str

    def usage(self) -> dict[str, int]:
        return {
            "calls": 1,
            "context_tokens": self.context_tokens,
            "generation_tokens": self.generation_tokens,
        }


@dataclass
class MockEntry:
    matcher: str  # any | digest | substring
    pattern: str
    response: str
    context_tokens: int = 0
    generation_tokens: int = 0
    max_uses: int | None = None  # None = unlimited
    uses: int = 0

    def matches(self, digest: str, full_text: str) -> bool:
        if self.max_uses is not None and self.uses >= self.max_uses:
            return False
        if self.matcher == "any":
            return True
        if self.matcher == "digest":
            return self.pattern == digest
        if self.matcher == "substring":
            return self.pattern in full_text
        raise GatewayError(f"unknown mock matcher {self.matcher!r}")


@dataclass
class MockScript:
    """Ordered scripted responses; earlier entries take precedence."""

    entries: list[MockEntry] = field(default_factory=list)

    @classmethod
    def from_entries(cls, entries: list[dict[str, Any]]) -> MockScript:
        out = []
        for e in entries:
            out.append(
                MockEntry(
                    matcher=e.get("matcher", "any"),
                    pattern=e.get("pattern", ""),
                    response=e["response"],
                    context_tokens=int(e.get("context_tokens", 0)),
                    generation_tokens=int(e.get("generation_tokens", 0)),
                    max_uses=e.get("max_uses"),
                )
            )
        return cls(out)

    @classmethod
    def from_file(cls, path: str) -> MockScript:
        try:
            import tomllib
        except ImportError:
            import tomli as tomllib
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
        if "entries" not in data:
            raise GatewayError(f"mock script {path} has no [[entries]]")
        return cls.from_entries(data["entries"])

    def respond(self, digest: str, messages: tuple[Message, ...]) -> MockEntry:
        full_text = "\n".join(t for _, t in messages)
        for entry in self.entries:
            if entry.matches(digest, full_text):
                entry.uses += 1
                return entry
        raise GatewayError(f"mock script has no matching entry for digest {digest}")


def _approx_tokens(text: str) -> int:
    """Whitespace approximation, used when the provider reports no usage."""
    return len(text.split())


class Gateway:
    """Uniform completion interface over the four provider modes."""

    def __init__(
        self,
        mode: str,
        *,
        base_url: str | None = None,
        model: str | None = None,
        api_key: str | None = None,
        cache_dir: str | None = None,
        script: MockScript | None = None,
        transport: Any = None,
        sleeper: Callable[[float], None] = time.sleep,
    ):
        if mode not in MODES:
            raise GatewayError(f"unknown gateway mode {mode!r}")
        if mode in ("live", "record") and not base_url:
            raise GatewayError(f"mode {mode} requires a provider base_url")
        if mode in ("record", "replay") and not cache_dir:
            raise GatewayError(f"mode {mode} requires a cache_dir")
        if mode == "mock" and script is None:
            raise GatewayError("mock mode requires a script")
        self.mode = mode
        self.base_url = (base_url or "").rstrip("/")
        self.model = model or ""
        self.api_key = api_key or os.environ.get("HEUREVO_API_KEY", "")
        self.cache_dir = cache_dir
        self.script = script
        self._transport = transport
        self._sleep = sleeper
        self.calls = 0
        self.context_tokens = 0
        self.generation_tokens = 0

    # -- public API ---------------------------------------------------

    def complete_chat(self, messages: list[Message], temperature: float) -> ChatExchange:
        if not messages:
            raise GatewayError("messages must be non-empty")
        for role, _ in messages:
            if role not in ROLES:
                raise GatewayError(f"unknown message role {role!r}")
        msgs = tuple((r, t) for r, t in messages)
        digest = prompt_digest(msgs, temperature)

        if self.mode == "mock":
            entry = self.script.respond(digest, msgs)
            exchange = ChatExchange(
                messages=msgs,
                temperature=temperature,
                response=entry.response,
                context_tokens=entry.context_tokens,
                generation_tokens=entry.generation_tokens,
                provider="mock",
                prompt_digest=digest,
            )
            # A mock run given a cache_dir records its exchanges like record
            # mode, so it can later be resumed or replayed digest-by-digest.
            if self.cache_dir:
                self._cache_store(exchange)
        elif self.mode == "replay":
            cached = self._cache_load(digest)
            if cached is None:
                raise GatewayError(f"replay cache miss for digest {digest}")
            exchange = cached
        elif self.mode == "record":
            cached = self._cache_load(digest)
            if cached is not None:
                exchange = cached
            else:
                exchange = self._live_call(msgs, temperature, digest)
                self._cache_store(exchange)
        else:  # live
            exchange = self._live_call(msgs, temperature, digest)

        self.calls += 1
        self.context_tokens += exchange.context_tokens
        self.generation_tokens += exchange.generation_tokens
        return exchange

    @property
    def session_totals(self) -> dict[str, int]:
        return {
            "calls": self.calls,
            "context_tokens": self.context_tokens,
            "generation_tokens": self.generation_tokens,
        }

    # -- cache --------------------------------------------------------

    def _cache_path(self, digest: str) -> str:
        return os.path.join(self.cache_dir, f"{digest}.json")

    def _cache_load(self, digest: str) -> ChatExchange | None:
        path = self._cache_path(digest)
        if not os.path.exists(path):
            return None
        with open(path, encoding="utf-8") as fh:
            d = json.load(fh)
        return ChatExchange(
            messages=tuple((r, t) for r, t in d["messages"]),
            temperature=d["temperature"],
            response=d["response"],
            context_tokens=d["context_tokens"],
            generation_tokens=d["generation_tokens"],
            provider="replay",
            prompt_digest=digest,
        )

    def _cache_store(self, exchange: ChatExchange) -> None:
        os.makedirs(self.cache_dir, exist_ok=True)
        path = self._cache_path(exchange.prompt_digest)
        body = canonical_json(
            {
                "messages": [[r, t] for r, t in exchange.messages],
                "temperature": exchange.temperature,
                "response": exchange.response,
                "context_tokens": exchange.context_tokens,
                "generation_tokens": exchange.generation_tokens,
            }
        )
        tmp = path + ".tmp"
        with open(tmp, "w", encoding="utf-8") as fh:
            fh.write(body)
        os.replace(tmp, path)

    # -- live transport -----------------------------------------------

    def _live_call(
        self, messages: tuple[Message, ...], temperature: float, digest: str
    ) -> ChatExchange:
        import httpx

        payload = {
            "model": self.model,
            "messages": [{"role": r, "content": t} for r, t in messages],
            "temperature": temperature,
        }
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        url = f"{self.base_url}/chat/completions"

        last_error: Exception | None = None
        client_kwargs: dict[str, Any] = {"timeout": 120.0}
        if self._transport is not None:
            client_kwargs["transport"] = self._transport
        for attempt in range(1 + len(RETRY_BACKOFF)):
            if attempt > 0:
                self._sleep(RETRY_BACKOFF[attempt - 1])
            try:
                with httpx.Client(**client_kwargs) as client:
                    resp = client.post(url, json=payload, headers=headers)
                resp.raise_for_status()
                body = resp.json()
                text = body["choices"][0]["message"]["content"]
                usage = body.get("usage") or {}
                ctx = usage.get("prompt_tokens")
                gen = usage.get("completion_tokens")
                if ctx is None:
                    ctx = sum(_approx_tokens(t) for _, t in messages)
                if gen is None:
                    gen = _approx_tokens(text)
                return ChatExchange(
                    messages=messages,
                    temperature=temperature,
                    response=text,
                    context_tokens=int(ctx),
                    generation_tokens=int(gen),
                    provider="live",
                    prompt_digest=digest,
                )
            except (httpx.HTTPError, KeyError, IndexError, ValueError) as exc:
                last_error = exc
        raise GatewayError(f"live provider failed after retries: {last_error}")


def usage_totals(source: Gateway | Iterable[JournalEvent]) -> tuple[int, int, int]:
    """(context_tokens, generation_tokens, call_count) from a gateway or journal.

    A gateway reports its session counters.  Journal events carry cumulative
    usage snapshots (checkpoints and the final summary), so the latest one
    seen is the run's total.
    """
    if isinstance(source, Gateway):
        t = source.session_totals
        return t["context_tokens"], t["generation_tokens"], t["calls"]
    ctx = gen = calls = 0
    for event in source:
        usage = event.payload.get("usage")
        if usage:
            ctx = int(usage.get("context_tokens", 0))
            gen = int(usage.get("generation_tokens", 0))
            calls = int(usage.get("calls", 0))
    return ctx, gen, calls
