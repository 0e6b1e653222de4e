"""A chat-completion server that records and replays canned completions.

Serves the same wire protocol the real provider speaks, backed by a fixture
directory keyed by prompt hash. With ``upstream_url`` set, misses are
forwarded to a real provider and the completion is recorded; without it,
misses return 404 with the prompt hash so the fixture can be seeded.

This lets the whole stack (HTTP transport included) run deterministically
offline.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .errors import TransportError
from .transport import FixtureTransport, GenerationConfig, HttpChatTransport


def create_mock_llm_app(
    fixtures_dir: str,
    upstream_url: str | None = None,
    upstream_model: str = "default-chat-model",
) -> FastAPI:
    app = FastAPI(title="llmberjack-mock-llm", docs_url=None, redoc_url=None)
    upstream = (
        HttpChatTransport(base_url=upstream_url, model=upstream_model)
        if upstream_url
        else None
    )
    fixture = FixtureTransport(fixtures_dir, upstream=upstream, record=True)
    app.state.fixture = fixture

    @app.post("/chat/completions")
    async def chat_completions(request: Request):
        body = await request.json()
        messages = body.get("messages", [])
        system = next((m["content"] for m in messages if m.get("role") == "system"), "")
        user = next((m["content"] for m in messages if m.get("role") == "user"), "")
        config = GenerationConfig(
            temperature=float(body.get("temperature", 0.0)),
            top_p=float(body.get("top_p", 1.0)),
            max_tokens=int(body.get("max_tokens", 512)),
            seed=int(body.get("seed", 0)),
        )
        try:
            completion = fixture.complete(config, system, user)
        except TransportError as exc:
            return JSONResponse(status_code=404, content={"error": str(exc)})
        return {
            "model": body.get("model", "mock"),
            "choices": [{"index": 0, "message": {"role": "assistant", "content": completion}}],
        }

    return app
