"""Decision sources: rule oracle, hosted LLM, and transcript replay.

All three answer the same questions through the same interface, so a
simulation run can swap between them without touching the harness. The
oracle answers from the structured assessment directly, the LLM source
sends the rendered question over HTTP, and the replay source returns
previously recorded responses, failing loudly if the questions have
drifted from the recording.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import requests

from .rules import Assessment
from .translation import render_decision, render_system_prompt

GEMINI_URL_TEMPLATE = (
    "https://generativelanguage.googleapis.com/v1beta/models/{model}:generateContent"
)


class BackendError(RuntimeError):
    """Base class for unrecoverable decision-source failures."""


class MissingApiKeyError(BackendError):
    pass


class RequestTimeoutError(BackendError):
    pass


class RateLimitedError(BackendError):
    pass


class ReplayExhaustedError(BackendError):
    pass


class ReplayMismatchError(BackendError):
    pass


@dataclass(frozen=True)
class BackendConfig:
    """Which decision source to use and how to reach it."""

    kind: str = "oracle"  # oracle | llm | replay
    api_key_env_name: str = "GOOGLE_API_KEY"
    model_identifier: str = "gemini-1.5-flash"
    min_request_interval: float = 4.0   # s between outbound LLM requests
    request_timeout: float = 30.0       # s
    max_retries: int = 2
    transcript_path: str | None = None  # replay input

    def __post_init__(self) -> None:
        if self.kind not in ("oracle", "llm", "replay"):
            raise ValueError(f"unknown backend kind {self.kind!r}")
        if self.min_request_interval < 0.0 or self.request_timeout <= 0.0:
            raise ValueError("intervals must be non-negative and timeout positive")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")


@dataclass(frozen=True)
class TranscriptEntry:
    """One question/response exchange, as recorded in JSONL transcripts."""

    sim_time: float
    question: str
    response: str
    latency: float
    backend_kind: str

    def to_json(self) -> str:
        return json.dumps(
            {
                "sim_time": self.sim_time,
                "question": self.question,
                "response": self.response,
                "latency": self.latency,
                "backend_kind": self.backend_kind,
            }
        )

    @classmethod
    def from_json(cls, line: str) -> "TranscriptEntry":
        obj = json.loads(line)
        return cls(
            sim_time=float(obj["sim_time"]),
            question=str(obj["question"]),
            response=str(obj["response"]),
            latency=float(obj["latency"]),
            backend_kind=str(obj["backend_kind"]),
        )


def record_transcript(entries: list[TranscriptEntry], path: str | Path) -> None:
    """Write entries as JSON Lines."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for entry in entries:
            fh.write(entry.to_json())
            fh.write("\n")


def load_transcript(path: str | Path) -> list[TranscriptEntry]:
    with Path(path).open("r", encoding="utf-8") as fh:
        return [TranscriptEntry.from_json(line) for line in fh if line.strip()]


@dataclass(frozen=True)
class Query:
    """A rendered question plus the structured situation it came from."""

    question: str
    assessment: Assessment


class DecisionSource:
    """Interface shared by all backends.

    decide() returns the raw response text; entry_kind and last_latency
    describe how the transcript entry for that exchange should be stamped.
    """

    kind: str = "abstract"

    def __init__(self) -> None:
        self.last_latency = 0.0
        self.entry_kind = self.kind

    def decide(self, query: Query) -> str:
        raise NotImplementedError


class OracleSource(DecisionSource):
    """Answers from the rule table, bypassing the text entirely."""

    kind = "oracle"

    def decide(self, query: Query) -> str:
        decision = query.assessment.decision
        if decision is None:
            raise BackendError("oracle asked about a situation asserting no rule")
        self.last_latency = 0.0
        return render_decision(decision)


class ReplaySource(DecisionSource):
    """Feeds back a recorded transcript in order.

    Questions are compared after whitespace normalization; any divergence
    means the simulation no longer matches the recording and replaying
    further would be meaningless.
    """

    kind = "replay"

    def __init__(self, entries: list[TranscriptEntry]) -> None:
        super().__init__()
        self._entries = list(entries)
        self._cursor = 0

    @staticmethod
    def _normalize(text: str) -> str:
        return " ".join(text.split())

    def decide(self, query: Query) -> str:
        if self._cursor >= len(self._entries):
            raise ReplayExhaustedError(
                f"transcript exhausted after {self._cursor} exchanges"
            )
        entry = self._entries[self._cursor]
        if self._normalize(entry.question) != self._normalize(query.question):
            raise ReplayMismatchError(
                f"question #{self._cursor} diverged from the recording:\n"
                f"  recorded: {entry.question!r}\n"
                f"  asked:    {query.question!r}"
            )
        self._cursor += 1
        # Stamp replayed exchanges exactly as they were recorded so a
        # replayed run serializes identically to the original.
        self.last_latency = entry.latency
        self.entry_kind = entry.backend_kind
        return entry.response


class GeminiTransport:
    """Minimal HTTP client for the Google generative language API."""

    def __init__(
        self,
        model: str,
        api_key: str,
        timeout: float,
        session: requests.Session | None = None,
    ) -> None:
        self._url = GEMINI_URL_TEMPLATE.format(model=model)
        self._api_key = api_key
        self._timeout = timeout
        self._session = session or requests.Session()

    def complete(self, system_prompt: str, question: str) -> str:
        payload = {
            "system_instruction": {"parts": [{"text": system_prompt}]},
            "contents": [{"role": "user", "parts": [{"text": question}]}],
        }
        try:
            response = self._session.post(
                self._url,
                json=payload,
                headers={"x-goog-api-key": self._api_key},
                timeout=self._timeout,
            )
        except requests.Timeout as exc:
            raise RequestTimeoutError(f"no response within {self._timeout}s") from exc
        if response.status_code == 429:
            raise RateLimitedError("rate limited by the API")
        if response.status_code != 200:
            raise BackendError(
                f"API returned {response.status_code}: {response.text[:200]}"
            )
        body = response.json()
        try:
            return body["candidates"][0]["content"]["parts"][0]["text"]
        except (KeyError, IndexError, TypeError) as exc:
            raise BackendError(f"unexpected API response shape: {body!r:.200}") from exc


class LlmSource(DecisionSource):
    """Live LLM backend with outbound request pacing.

    Consecutive requests are spaced at least min_request_interval seconds
    apart, measured on the injected clock. Rate-limit and timeout errors
    are retried up to max_retries times before surfacing as typed errors.
    The system prompt is resent with every request; the exchange is
    stateless on the API side.
    """

    kind = "llm"

    def __init__(
        self,
        config: BackendConfig,
        transport: GeminiTransport | None = None,
        clock: Callable[[], float] = time.monotonic,
        sleep: Callable[[float], None] = time.sleep,
    ) -> None:
        super().__init__()
        self._config = config
        self._clock = clock
        self._sleep = sleep
        self._last_request_at: float | None = None
        if transport is None:
            api_key = os.environ.get(config.api_key_env_name, "")
            if not api_key:
                raise MissingApiKeyError(
                    f"environment variable {config.api_key_env_name} is not set"
                )
            transport = GeminiTransport(
                model=config.model_identifier,
                api_key=api_key,
                timeout=config.request_timeout,
            )
        self._transport = transport
        self._system_prompt = render_system_prompt()

    def _pace(self) -> None:
        if self._last_request_at is None:
            return
        now = self._clock()
        wait = self._config.min_request_interval - (now - self._last_request_at)
        if wait > 0.0:
            self._sleep(wait)

    def decide(self, query: Query) -> str:
        attempts = self._config.max_retries + 1
        last_error: BackendError | None = None
        for _ in range(attempts):
            self._pace()
            started = self._clock()
            self._last_request_at = started
            try:
                text = self._transport.complete(self._system_prompt, query.question)
            except (RateLimitedError, RequestTimeoutError) as exc:
                last_error = exc
                continue
            self.last_latency = self._clock() - started
            return text
        assert last_error is not None
        raise last_error


def make_source(config: BackendConfig, **overrides) -> DecisionSource:
    """Build the decision source described by config.

    Keyword overrides (transport, clock, sleep) are forwarded to the LLM
    source; tests use them to substitute fakes.
    """
    if config.kind == "oracle":
        return OracleSource()
    if config.kind == "llm":
        return LlmSource(config, **overrides)
    if config.kind == "replay":
        if not config.transcript_path:
            raise ValueError("replay backend needs transcript_path")
        return ReplaySource(load_transcript(config.transcript_path))
    raise ValueError(f"unknown backend kind {config.kind!r}")
