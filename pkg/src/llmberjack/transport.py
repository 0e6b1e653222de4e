"""Provider-agnostic chat-completion transport plus deterministic test doubles.

All LLM-assisted tasks go through :class:`ChatTransport`. The three sampling
presets are frozen constants; the code paths that use them assert the exact
preset so a misconfigured call fails loudly.

Wire protocol of the real transport: HTTP POST ``{base_url}/chat/completions``
with a JSON body ``{model, messages: [system, user], temperature, top_p,
max_tokens, seed}``; the API key comes from the ``LLMBERJACK_API_KEY``
environment variable. Responses follow the common
``{"choices": [{"message": {"content": ...}}]}`` shape.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Protocol

import httpx

from .errors import TransportError

API_KEY_ENV = "LLMBERJACK_API_KEY"


@dataclass(frozen=True)
class GenerationConfig:
    temperature: float
    top_p: float
    max_tokens: int
    seed: int

    def as_tuple(self) -> tuple[float, float, int, int]:
        return (self.temperature, self.top_p, self.max_tokens, self.seed)


# Frozen sampling presets: deterministic JSON repair, expressive profile
# synthesis, and moderately stochastic message refinement.
NORMALIZE = GenerationConfig(temperature=0.0, top_p=0.7, max_tokens=8192, seed=42)
PROFILE = GenerationConfig(temperature=1.2, top_p=0.9, max_tokens=2048, seed=42)
REFINE = GenerationConfig(temperature=0.7, top_p=0.9, max_tokens=512, seed=42)

PRESETS = {"normalize": NORMALIZE, "profile": PROFILE, "refine": REFINE}


class ChatTransport(Protocol):
    """One synchronous chat completion. Implementations must be timeout-bounded
    and must raise :class:`TransportError` with ``retryable`` set correctly."""

    def complete(self, config: GenerationConfig, system: str, user: str) -> str:
        ...


def prompt_hash(system: str, user: str) -> str:
    """Stable key for a prompt pair, used to index canned completions."""
    payload = json.dumps({"system": system, "user": user}, ensure_ascii=False, sort_keys=True)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


class HttpChatTransport:
    """Real provider client: bounded timeout, 3 retries with exponential
    backoff on retryable failures (connection errors, timeouts, 429/5xx)."""

    def __init__(
        self,
        base_url: str,
        model: str,
        api_key: str | None = None,
        timeout: float = 60.0,
        max_retries: int = 3,
        send_seed: bool = True,
        client: httpx.Client | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.api_key = api_key if api_key is not None else os.environ.get(API_KEY_ENV)
        self.timeout = timeout
        self.max_retries = max_retries
        self.send_seed = send_seed
        self._client = client if client is not None else httpx.Client(timeout=timeout)
        self._sleep = sleep

    def complete(self, config: GenerationConfig, system: str, user: str) -> str:
        body = {
            "model": self.model,
            "messages": [
                {"role": "system", "content": system},
                {"role": "user", "content": user},
            ],
            "temperature": config.temperature,
            "top_p": config.top_p,
            "max_tokens": config.max_tokens,
        }
        if self.send_seed:
            body["seed"] = config.seed
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"

        last_error: TransportError | None = None
        for attempt in range(self.max_retries + 1):
            try:
                response = self._client.post(
                    f"{self.base_url}/chat/completions", json=body, headers=headers
                )
            except httpx.TimeoutException as exc:
                last_error = TransportError(f"timeout: {exc}", retryable=True)
            except httpx.HTTPError as exc:
                last_error = TransportError(f"connection failed: {exc}", retryable=True)
            else:
                if response.status_code == 429 or response.status_code >= 500:
                    last_error = TransportError(
                        f"provider returned {response.status_code}", retryable=True
                    )
                elif response.status_code >= 400:
                    raise TransportError(
                        f"provider rejected request ({response.status_code}): "
                        f"{response.text[:200]}",
                        retryable=False,
                    )
                else:
                    return self._extract_content(response)
            if attempt < self.max_retries:
                self._sleep(min(0.5 * 2**attempt, 8.0))
        assert last_error is not None
        raise last_error

    @staticmethod
    def _extract_content(response: httpx.Response) -> str:
        try:
            data = response.json()
            return data["choices"][0]["message"]["content"]
        except (ValueError, LookupError, TypeError) as exc:
            raise TransportError(f"unexpected response shape: {exc}", retryable=False) from None


# --- test doubles -------------------------------------------------------------


@dataclass
class TransportCall:
    config: GenerationConfig
    system: str
    user: str


class EchoTransport:
    """Returns the user message verbatim; records every call."""

    def __init__(self):
        self.calls: list[TransportCall] = []

    def complete(self, config: GenerationConfig, system: str, user: str) -> str:
        self.calls.append(TransportCall(config, system, user))
        return user


class ScriptedTransport:
    """Plays back a fixed list of completions, in order; records every call.

    Entries may be strings or exceptions (which are raised), so retry and
    failure paths can be scripted too.
    """

    def __init__(self, replies: list):
        self.replies = list(replies)
        self.calls: list[TransportCall] = []

    def complete(self, config: GenerationConfig, system: str, user: str) -> str:
        self.calls.append(TransportCall(config, system, user))
        if not self.replies:
            raise TransportError("scripted transport exhausted", retryable=False)
        reply = self.replies.pop(0)
        if isinstance(reply, Exception):
            raise reply
        return reply


class FixtureTransport:
    """Replays canned completions from a directory keyed by prompt hash.

    On a miss it falls through to ``upstream`` (recording the result when
    ``record`` is set) or fails fatally. Fixture files are JSON documents
    holding the prompt pair, the config and the completion, so recordings
    double as human-readable traces.
    """

    def __init__(
        self,
        fixtures_dir: str | Path,
        upstream: ChatTransport | None = None,
        record: bool = True,
    ):
        self.fixtures_dir = Path(fixtures_dir)
        self.upstream = upstream
        self.record = record
        self.calls: list[TransportCall] = []

    def _path(self, key: str) -> Path:
        return self.fixtures_dir / f"{key}.json"

    def complete(self, config: GenerationConfig, system: str, user: str) -> str:
        self.calls.append(TransportCall(config, system, user))
        key = prompt_hash(system, user)
        path = self._path(key)
        if path.exists():
            return json.loads(path.read_text("utf-8"))["completion"]
        if self.upstream is None:
            raise TransportError(f"no canned completion for prompt {key}", retryable=False)
        completion = self.upstream.complete(config, system, user)
        if self.record:
            self.fixtures_dir.mkdir(parents=True, exist_ok=True)
            path.write_text(
                json.dumps(
                    {
                        "system": system,
                        "user": user,
                        "config": {
                            "temperature": config.temperature,
                            "top_p": config.top_p,
                            "max_tokens": config.max_tokens,
                            "seed": config.seed,
                        },
                        "completion": completion,
                    },
                    ensure_ascii=False,
                    sort_keys=True,
                    indent=2,
                ),
                "utf-8",
            )
        return completion
