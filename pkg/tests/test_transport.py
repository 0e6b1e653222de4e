from __future__ import annotations

import dataclasses
import json

import httpx
import pytest

from llmberjack.errors import TransportError
from llmberjack.transport import (
    NORMALIZE,
    PROFILE,
    REFINE,
    EchoTransport,
    FixtureTransport,
    GenerationConfig,
    HttpChatTransport,
    ScriptedTransport,
    prompt_hash,
)


def test_preset_values_pinned():
    assert NORMALIZE.as_tuple() == (0.0, 0.7, 8192, 42)
    assert PROFILE.as_tuple() == (1.2, 0.9, 2048, 42)
    assert REFINE.as_tuple() == (0.7, 0.9, 512, 42)


def test_presets_are_immutable():
    with pytest.raises(dataclasses.FrozenInstanceError):
        NORMALIZE.temperature = 1.0  # type: ignore[misc]


def test_prompt_hash_stable_and_sensitive():
    assert prompt_hash("s", "u") == prompt_hash("s", "u")
    assert prompt_hash("s", "u") != prompt_hash("s", "u2")
    assert prompt_hash("s", "u") != prompt_hash("s2", "u")


def test_echo_transport_records_calls():
    echo = EchoTransport()
    assert echo.complete(REFINE, "sys", "payload") == "payload"
    assert echo.calls[0].config == REFINE
    assert echo.calls[0].system == "sys"


def test_scripted_transport_plays_in_order():
    scripted = ScriptedTransport(["one", TransportError("boom", retryable=False), "two"])
    assert scripted.complete(REFINE, "s", "u") == "one"
    with pytest.raises(TransportError):
        scripted.complete(REFINE, "s", "u")
    assert scripted.complete(REFINE, "s", "u") == "two"
    with pytest.raises(TransportError):
        scripted.complete(REFINE, "s", "u")  # exhausted


def test_fixture_transport_records_then_replays(tmp_path):
    upstream = ScriptedTransport(["canned answer"])
    fixture = FixtureTransport(tmp_path, upstream=upstream, record=True)
    assert fixture.complete(REFINE, "sys", "usr") == "canned answer"
    # upstream now exhausted; replay must come from disk
    again = FixtureTransport(tmp_path)
    assert again.complete(REFINE, "sys", "usr") == "canned answer"
    stored = json.loads(next(tmp_path.glob("*.json")).read_text())
    assert stored["completion"] == "canned answer"
    assert stored["config"]["max_tokens"] == 512


def test_fixture_transport_miss_is_fatal(tmp_path):
    fixture = FixtureTransport(tmp_path)
    with pytest.raises(TransportError) as excinfo:
        fixture.complete(REFINE, "sys", "usr")
    assert not excinfo.value.retryable


def _http_transport(handler, **kwargs) -> tuple[HttpChatTransport, list[float]]:
    sleeps: list[float] = []
    client = httpx.Client(transport=httpx.MockTransport(handler))
    transport = HttpChatTransport(
        base_url="http://llm.test/v1",
        model="test-model",
        api_key="sekrit",
        client=client,
        sleep=sleeps.append,
        **kwargs,
    )
    return transport, sleeps


def _ok_response(content: str) -> httpx.Response:
    return httpx.Response(
        200, json={"choices": [{"message": {"role": "assistant", "content": content}}]}
    )


def test_http_transport_happy_path():
    seen = {}

    def handler(request: httpx.Request) -> httpx.Response:
        seen["url"] = str(request.url)
        seen["body"] = json.loads(request.content)
        seen["auth"] = request.headers.get("authorization")
        return _ok_response("hi there")

    transport, sleeps = _http_transport(handler)
    result = transport.complete(REFINE, "sys prompt", "user prompt")
    assert result == "hi there"
    assert seen["url"] == "http://llm.test/v1/chat/completions"
    assert seen["auth"] == "Bearer sekrit"
    body = seen["body"]
    assert body["model"] == "test-model"
    assert body["temperature"] == 0.7 and body["top_p"] == 0.9
    assert body["max_tokens"] == 512 and body["seed"] == 42
    assert body["messages"][0] == {"role": "system", "content": "sys prompt"}
    assert body["messages"][1] == {"role": "user", "content": "user prompt"}
    assert sleeps == []


def test_http_transport_seed_can_be_dropped():
    bodies = []

    def handler(request: httpx.Request) -> httpx.Response:
        bodies.append(json.loads(request.content))
        return _ok_response("ok")

    transport, _ = _http_transport(handler, send_seed=False)
    transport.complete(NORMALIZE, "s", "u")
    assert "seed" not in bodies[0]


def test_http_transport_retries_on_429_then_succeeds():
    attempts = []

    def handler(request: httpx.Request) -> httpx.Response:
        attempts.append(1)
        if len(attempts) < 3:
            return httpx.Response(429, json={"error": "slow down"})
        return _ok_response("finally")

    transport, sleeps = _http_transport(handler)
    assert transport.complete(PROFILE, "s", "u") == "finally"
    assert len(attempts) == 3
    assert sleeps == [0.5, 1.0]  # exponential backoff


def test_http_transport_gives_up_after_retries():
    def handler(request: httpx.Request) -> httpx.Response:
        return httpx.Response(500, text="boom")

    transport, sleeps = _http_transport(handler)
    with pytest.raises(TransportError) as excinfo:
        transport.complete(REFINE, "s", "u")
    assert excinfo.value.retryable
    assert len(sleeps) == 3


def test_http_transport_client_error_is_fatal_and_not_retried():
    attempts = []

    def handler(request: httpx.Request) -> httpx.Response:
        attempts.append(1)
        return httpx.Response(401, text="bad key")

    transport, sleeps = _http_transport(handler)
    with pytest.raises(TransportError) as excinfo:
        transport.complete(REFINE, "s", "u")
    assert not excinfo.value.retryable
    assert len(attempts) == 1
    assert sleeps == []


def test_http_transport_timeout_is_retryable():
    def handler(request: httpx.Request) -> httpx.Response:
        raise httpx.ConnectTimeout("too slow")

    transport, sleeps = _http_transport(handler)
    with pytest.raises(TransportError) as excinfo:
        transport.complete(REFINE, "s", "u")
    assert excinfo.value.retryable
    assert len(sleeps) == 3


def test_http_transport_bad_response_shape():
    def handler(request: httpx.Request) -> httpx.Response:
        return httpx.Response(200, json={"unexpected": True})

    transport, _ = _http_transport(handler)
    with pytest.raises(TransportError) as excinfo:
        transport.complete(REFINE, "s", "u")
    assert not excinfo.value.retryable


def test_custom_config_roundtrip():
    config = GenerationConfig(temperature=0.9, top_p=0.5, max_tokens=64, seed=7)
    assert config.as_tuple() == (0.9, 0.5, 64, 7)
