"""REST service for the annotation UI and scripted clients.

Route map:

    POST   /api/files                          upload discussion or draft
    GET    /api/files                          list entries
    GET    /api/files/{id}                     entry + document
    GET    /api/trees/{id}                     full tree
    GET    /api/trees/{id}/nodes/{nid}/focus   parent / node / children
    GET    /api/trees/{id}/nodes/{nid}/subtree subtree view
    POST   /api/trees/{id}/normalize           LLM structure repair
    POST   /api/drafts                         create draft
    GET    /api/drafts/{id}                    fetch draft
    PATCH  /api/drafts/{id}                    apply a command list (versioned)
    DELETE /api/drafts/{id}/turns/{i}          remove one turn
    POST   /api/drafts/{id}/turns/{i}/refine   LLM suggestion for one turn
    POST   /api/drafts/{id}/turns/{i}/decision accept / modify / reject
    POST   /api/speakers/{tid}/{sid}/profile/refine
    GET    /api/drafts/{id}/lint               soft-rule findings
    GET    /api/drafts/{id}/export             final-conversation JSON
    GET    /api/metrics/session                v_turn / v_tokens
    GET    /api/schema                         wire-format schemas

Errors use one body shape ``{"code", "message", "detail"}`` with codes
bad_request(400), not_found(404), conflict(409), upstream_llm(502),
internal(500). Mutating endpoints are idempotent under retry when the client
sends the same ``Idempotency-Key`` header. Per-draft mutations are serialized
server-side; reads run lock-free on immutable snapshots.
"""

from __future__ import annotations

import json
import threading
import uuid
from collections import defaultdict
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from typing import Callable

from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from . import draft as draft_ops
from .config import Settings
from .draft import EVERYONE, DraftConversation
from .errors import (
    AlreadyExists,
    EmptyCompletion,
    LlmberjackError,
    MalformedInput,
    NoData,
    ParseError,
    SuggestionNotPending,
    TransportError,
    UnknownDraft,
    UnknownNode,
    UnknownSpeaker,
    UnknownTree,
    UnrepairableStructure,
    VersionConflict,
)
from .metrics import SessionRecord, token_speed, turn_speed
from .refine import (
    RefinementConstraints,
    RefinementSuggestion,
    apply_decision,
    normalize_tree,
    refine_message,
    refine_profile,
    select_profile_evidence,
)
from .store import FileStore
from .transport import ChatTransport, HttpChatTransport
from .tree import (
    MessageNode,
    ReplyTree,
    ensure_users,
    focused_view,
    parse_discussion,
    subtree,
    tree_from_document,
    tree_to_document,
)

Clock = Callable[[], datetime]


def _utc_now() -> datetime:
    return datetime.now(timezone.utc)


@dataclass
class PendingSuggestion:
    suggestion_id: str
    draft_id: str
    turn_index: int
    suggestion: RefinementSuggestion


def _error_response(code: str, status: int, message: str, detail: dict | None = None):
    return JSONResponse(
        status_code=status,
        content={"code": code, "message": message, "detail": detail or {}},
    )


def _status_for(exc: LlmberjackError) -> tuple[str, int]:
    if isinstance(exc, (VersionConflict, SuggestionNotPending, AlreadyExists)):
        return "conflict", 409
    if isinstance(exc, (UnknownTree, UnknownDraft, UnknownNode, UnknownSpeaker)):
        return "not_found", 404
    if isinstance(exc, (TransportError, EmptyCompletion, UnrepairableStructure)):
        return "upstream_llm", 502
    return "bad_request", 400


def create_app(
    settings: Settings | None = None,
    transport: ChatTransport | None = None,
    clock: Clock = _utc_now,
) -> FastAPI:
    settings = settings if settings is not None else Settings()
    app = FastAPI(title="llmberjack", docs_url=None, redoc_url=None)
    store = FileStore(settings.data_dir, clock=clock)

    if transport is None and settings.llm_base_url:
        transport = HttpChatTransport(
            base_url=settings.llm_base_url, model=settings.model, api_key=settings.api_key
        )

    app.state.settings = settings
    app.state.store = store
    app.state.transport = transport
    app.state.clock = clock
    app.state.suggestions = {}
    app.state.refinement_records = []
    app.state.idempotency_cache = {}
    draft_locks: dict[str, threading.Lock] = defaultdict(threading.Lock)

    if settings.cors_origin:
        app.add_middleware(
            CORSMiddleware,
            allow_origins=[settings.cors_origin],
            allow_methods=["*"],
            allow_headers=["*"],
        )

    @app.exception_handler(LlmberjackError)
    async def domain_error_handler(request: Request, exc: LlmberjackError):
        code, status = _status_for(exc)
        detail: dict = {"error": type(exc).__name__}
        if isinstance(exc, ParseError) and exc.node_ids:
            detail["node_ids"] = list(exc.node_ids)
        return _error_response(code, status, str(exc), detail)

    @app.middleware("http")
    async def idempotency(request: Request, call_next):
        key = request.headers.get("Idempotency-Key")
        if not key or request.method not in ("POST", "PATCH", "DELETE"):
            return await call_next(request)
        cache_key = (request.method, request.url.path, key)
        cached = app.state.idempotency_cache.get(cache_key)
        if cached is not None:
            status, media_type, body = cached
            return Response(content=body, status_code=status, media_type=media_type)
        response = await call_next(request)
        body = b"".join([chunk async for chunk in response.body_iterator])
        app.state.idempotency_cache[cache_key] = (
            response.status_code,
            response.headers.get("content-type", "application/json"),
            body,
        )
        return Response(
            content=body,
            status_code=response.status_code,
            media_type=response.headers.get("content-type", "application/json"),
        )

    # --- helpers -------------------------------------------------------------

    def require_transport() -> ChatTransport:
        if app.state.transport is None:
            raise TransportError("no LLM transport configured", retryable=False)
        return app.state.transport

    async def read_json(request: Request) -> dict:
        try:
            payload = await request.json()
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            raise MalformedInput(f"request body is not valid JSON: {exc}") from None
        if not isinstance(payload, dict):
            raise MalformedInput("request body must be a JSON object")
        return payload

    def load_tree(tree_id: str) -> ReplyTree:
        got = store.get(tree_id)
        if got is None or got[0].kind != "discussion":
            raise UnknownTree(tree_id)
        return tree_from_document(got[1])

    def load_draft(draft_id: str) -> DraftConversation:
        got = store.get(draft_id)
        if got is None or got[0].kind != "draft":
            raise UnknownDraft(draft_id)
        return draft_ops.draft_from_document(got[1])

    def node_json(node: MessageNode) -> dict:
        return {
            "id": node.id,
            "author": node.author_id,
            "text": node.text,
            "parent": node.parent_id,
            "children": list(node.child_ids),
            "attrs": dict(node.attrs),
        }

    def tree_json(tree: ReplyTree) -> dict:
        order = [n.id for n in tree.walk()]
        return {
            "tree_id": tree.tree_id,
            "root_id": tree.root_id,
            "topic": tree.topic,
            "users": {uid: tree.users[uid].to_dict() for uid in sorted(tree.users)},
            "nodes": {nid: node_json(tree.nodes[nid]) for nid in order},
            "order": order,
        }

    def parse_addressees(value):
        if value is None:
            return None
        if value == EVERYONE:
            return EVERYONE
        if isinstance(value, list):
            return frozenset(str(v) for v in value)
        raise MalformedInput(f"addressees must be a list or {EVERYONE!r}, got {value!r}")

    def apply_command(
        draft: DraftConversation, tree: ReplyTree, command: dict
    ) -> DraftConversation:
        if not isinstance(command, dict):
            raise MalformedInput("each command must be an object")
        op = command.get("op")
        try:
            if op == "append_turn":
                return draft_ops.append_turn(
                    draft,
                    tree,
                    node_id=command.get("node_id"),
                    text=command.get("text"),
                    speaker_id=command.get("speaker"),
                    addressees=parse_addressees(command.get("addressees")),
                    clock=clock,
                )
            if op == "reorder_turn":
                return draft_ops.reorder_turn(draft, int(command["from"]), int(command["to"]))
            if op == "set_addressees":
                return draft_ops.set_addressees(
                    draft, int(command["index"]), parse_addressees(command["addressees"])
                )
            if op == "edit_text":
                return draft_ops.edit_text(draft, int(command["index"]), command["text"], clock=clock)
            if op == "remove_turn":
                return draft_ops.remove_turn(draft, int(command["index"]))
            if op == "set_status":
                return draft_ops.set_status(draft, command["status"])
            if op == "set_title":
                return replace(draft, title=str(command["title"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedInput(f"bad arguments for command {op!r}: {exc}") from None
        raise MalformedInput(f"unknown command op {op!r}")

    def save_draft(draft: DraftConversation, expected_version: int | None) -> DraftConversation:
        current = load_draft(draft.draft_id)
        if expected_version is not None and expected_version != current.version:
            raise VersionConflict(expected=current.version, got=expected_version)
        draft = replace(draft, version=current.version + 1)
        store.update(draft.draft_id, draft_ops.draft_to_document(draft))
        return draft

    # --- files ----------------------------------------------------------------

    @app.post("/api/files", status_code=201)
    async def upload_file(request: Request):
        payload = await read_json(request)
        kind = payload.get("kind")
        if kind not in ("discussion", "draft"):
            raise MalformedInput(f"kind must be 'discussion' or 'draft', got {kind!r}")
        raw = payload.get("raw")
        document = payload.get("document")
        if (raw is None) == (document is None):
            raise MalformedInput("provide exactly one of 'raw' (string) or 'document' (object)")
        if raw is not None and not isinstance(raw, str):
            raise MalformedInput("'raw' must be a string")

        if kind == "discussion":
            try:
                tree = parse_discussion(raw) if raw is not None else tree_from_document(document)
            except ParseError as exc:
                detail: dict = {"error": type(exc).__name__, "node_ids": list(exc.node_ids)}
                if raw is not None:
                    blob_id = store.quarantine(raw)
                    detail["quarantine_id"] = blob_id
                    detail["normalize_with"] = f"/api/trees/{blob_id}/normalize"
                return _error_response("bad_request", 400, str(exc), detail)
            tree = ensure_users(tree)
            file_id = uuid.uuid4().hex
            name = payload.get("name") or tree.tree_id
            tree = replace(tree, tree_id=file_id)
            entry = store.put("discussion", name, tree_to_document(tree), file_id=file_id)
            return entry.to_dict()

        draft = (
            draft_ops.parse_draft(raw)
            if raw is not None
            else draft_ops.draft_from_document(document)
        )
        source = store.get(draft.source_tree_id)
        if source is None or source[0].kind != "discussion":
            raise MalformedInput(f"draft references unknown tree {draft.source_tree_id!r}")
        if store.get(draft.draft_id) is not None:
            raise AlreadyExists(f"a file with id {draft.draft_id!r} already exists")
        name = payload.get("name") or draft.title
        entry = store.put(
            "draft", name, draft_ops.draft_to_document(draft), file_id=draft.draft_id
        )
        return entry.to_dict()

    @app.get("/api/files")
    async def list_files():
        return {"files": [e.to_dict() for e in store.list_entries()]}

    @app.get("/api/files/{file_id}")
    async def get_file(file_id: str):
        got = store.get(file_id)
        if got is None:
            raise UnknownTree(file_id)
        entry, document = got
        return {"entry": entry.to_dict(), "document": document}

    # --- trees ------------------------------------------------------------------

    @app.get("/api/trees/{tree_id}")
    async def get_tree(tree_id: str):
        return tree_json(load_tree(tree_id))

    @app.get("/api/trees/{tree_id}/nodes/{node_id}/focus")
    async def get_focus(tree_id: str, node_id: str):
        view = focused_view(load_tree(tree_id), node_id)
        return {
            "parent": None if view.parent is None else node_json(view.parent),
            "node": node_json(view.node),
            "children": [node_json(c) for c in view.children],
        }

    @app.get("/api/trees/{tree_id}/nodes/{node_id}/subtree")
    async def get_subtree(tree_id: str, node_id: str):
        return tree_json(subtree(load_tree(tree_id), node_id))

    @app.post("/api/trees/{tree_id}/normalize")
    async def normalize(tree_id: str):
        transport_ = require_transport()
        quarantined = store.quarantined(tree_id)
        if quarantined is not None:
            tree = normalize_tree(transport_, quarantined)
            tree = replace(tree, tree_id=tree_id)
            entry = store.put("discussion", tree_id, tree_to_document(tree), file_id=tree_id)
            return {"entry": entry.to_dict(), "tree": tree_json(tree)}
        got = store.get(tree_id)
        if got is None or got[0].kind != "discussion":
            raise UnknownTree(tree_id)
        raw = json.dumps(got[1], ensure_ascii=False, sort_keys=True)
        tree = normalize_tree(transport_, raw)
        tree = replace(tree, tree_id=tree_id)
        entry = store.update(tree_id, tree_to_document(tree))
        return {"entry": entry.to_dict(), "tree": tree_json(tree)}

    # --- drafts ---------------------------------------------------------------------

    @app.post("/api/drafts", status_code=201)
    async def create_draft(request: Request):
        payload = await read_json(request)
        tree_id = payload.get("source_tree_id")
        if not tree_id:
            raise MalformedInput("source_tree_id is required")
        tree = load_tree(str(tree_id))
        draft = draft_ops.create_draft(tree, title=str(payload.get("title", "")))
        store.put("draft", draft.title or draft.draft_id, draft_ops.draft_to_document(draft),
                  file_id=draft.draft_id)
        return draft_ops.draft_to_document(draft)

    @app.get("/api/drafts/{draft_id}")
    async def get_draft(draft_id: str):
        return draft_ops.draft_to_document(load_draft(draft_id))

    @app.patch("/api/drafts/{draft_id}")
    async def patch_draft(draft_id: str, request: Request):
        payload = await read_json(request)
        commands = payload.get("commands")
        if not isinstance(commands, list):
            raise MalformedInput("'commands' must be a list")
        if "version" not in payload:
            raise MalformedInput("'version' is required")
        expected_version = int(payload["version"])
        with draft_locks[draft_id]:
            draft = load_draft(draft_id)
            if expected_version != draft.version:
                raise VersionConflict(expected=draft.version, got=expected_version)
            tree = load_tree(draft.source_tree_id)
            for command in commands:
                draft = apply_command(draft, tree, command)
            draft = save_draft(draft, expected_version)
        return draft_ops.draft_to_document(draft)

    @app.delete("/api/drafts/{draft_id}/turns/{index}")
    async def delete_turn(draft_id: str, index: int, version: int | None = None):
        with draft_locks[draft_id]:
            draft = load_draft(draft_id)
            draft = draft_ops.remove_turn(draft, index)
            draft = save_draft(draft, version)
        return draft_ops.draft_to_document(draft)

    @app.get("/api/drafts/{draft_id}/lint")
    async def lint(draft_id: str):
        draft = load_draft(draft_id)
        tree = load_tree(draft.source_tree_id)
        return {"findings": [f.to_dict() for f in draft_ops.lint_draft(draft, tree)]}

    @app.get("/api/drafts/{draft_id}/export")
    async def export(draft_id: str):
        draft = load_draft(draft_id)
        tree = load_tree(draft.source_tree_id)
        return Response(
            content=draft_ops.export_conversation(draft, tree), media_type="application/json"
        )

    # --- LLM assistance -----------------------------------------------------------

    @app.post("/api/drafts/{draft_id}/turns/{index}/refine")
    async def refine_turn(draft_id: str, index: int, request: Request):
        transport_ = require_transport()
        payload = await read_json(request)
        try:
            constraints = RefinementConstraints.from_dict(payload)
        except (KeyError, ValueError) as exc:
            raise MalformedInput(f"bad constraints: {exc}") from None
        draft = load_draft(draft_id)
        tree = load_tree(draft.source_tree_id)
        suggestion = refine_message(transport_, draft, tree, index, constraints)
        pending = PendingSuggestion(
            suggestion_id=uuid.uuid4().hex,
            draft_id=draft_id,
            turn_index=index,
            suggestion=suggestion,
        )
        app.state.suggestions[pending.suggestion_id] = pending
        return {
            "suggestion_id": pending.suggestion_id,
            "draft_id": draft_id,
            "turn_index": index,
            "original_text": suggestion.original_text,
            "suggested_text": suggestion.suggested_text,
            "constraints": suggestion.constraints.to_dict(),
            "decision": suggestion.decision,
            "latency": suggestion.latency,
        }

    @app.post("/api/drafts/{draft_id}/turns/{index}/decision")
    async def decide(draft_id: str, index: int, request: Request):
        payload = await read_json(request)
        suggestion_id = payload.get("suggestion_id")
        pending = app.state.suggestions.get(suggestion_id)
        if pending is None or pending.draft_id != draft_id or pending.turn_index != index:
            raise UnknownNode(f"suggestion {suggestion_id!r}")
        decision = payload.get("decision")
        if decision not in ("accepted", "modified", "rejected"):
            raise MalformedInput(f"decision must be accepted|modified|rejected, got {decision!r}")
        with draft_locks[draft_id]:
            draft = load_draft(draft_id)
            new_draft = apply_decision(
                draft, index, pending.suggestion, decision, payload.get("edited_text"), clock=clock
            )
            if decision != "rejected":
                new_draft = save_draft(new_draft, None)
                app.state.refinement_records.append(
                    SessionRecord(
                        annotator_id="service",
                        kind="refinement",
                        turns_selected=0,
                        duration=max(pending.suggestion.latency, 1e-6),
                        final_token_counts=(pending.suggestion.token_count,),
                    )
                )
        return {
            "draft": draft_ops.draft_to_document(new_draft),
            "suggestion": {
                "suggestion_id": pending.suggestion_id,
                "decision": pending.suggestion.decision,
                "final_text": pending.suggestion.final_text,
                "token_count": pending.suggestion.token_count,
            },
        }

    @app.post("/api/speakers/{tree_id}/{speaker_id}/profile/refine")
    async def refine_speaker(tree_id: str, speaker_id: str, request: Request):
        transport_ = require_transport()
        payload = await read_json(request) if int(request.headers.get("content-length") or 0) else {}
        tree = load_tree(tree_id)
        if speaker_id not in tree.users:
            raise UnknownSpeaker(speaker_id)
        draft_id = payload.get("draft_id")
        if draft_id:
            draft = load_draft(str(draft_id))
        else:
            draft = DraftConversation(draft_id="", source_tree_id=tree_id, title="")
        evidence = select_profile_evidence(draft, tree, speaker_id)
        updated = refine_profile(transport_, tree.users[speaker_id], evidence)
        users = dict(tree.users)
        users[speaker_id] = updated
        tree = replace(tree, users=users)
        store.update(tree_id, tree_to_document(tree))
        return {
            "speaker": updated.to_dict(),
            "previous_description": updated.previous_description,
        }

    # --- metrics and schemas ----------------------------------------------------------

    @app.get("/api/metrics/session")
    async def session_metrics():
        records: list[SessionRecord] = list(app.state.refinement_records)
        for entry in store.list_entries(kind="draft"):
            got = store.get(entry.file_id)
            assert got is not None
            draft = draft_ops.draft_from_document(got[1])
            if not draft.timing:
                continue
            started = datetime.fromisoformat(entry.created_at)
            last = datetime.fromisoformat(draft.timing[-1]["turn_added_at"])
            duration = (last - started).total_seconds()
            if duration > 0:
                records.append(
                    SessionRecord(
                        annotator_id=entry.file_id,
                        kind="selection",
                        turns_selected=len(draft.timing),
                        duration=duration,
                    )
                )
        out: dict = {
            "selection_sessions": sum(1 for r in records if r.kind == "selection"),
            "refinement_sessions": sum(1 for r in records if r.kind == "refinement"),
        }
        try:
            out["v_turn"] = turn_speed(records)
        except NoData:
            out["v_turn"] = None
        try:
            out["v_tokens"] = token_speed(records)
        except NoData:
            out["v_tokens"] = None
        return out

    @app.get("/api/schema")
    async def schemas():
        return WIRE_SCHEMAS

    return app


WIRE_SCHEMAS: dict = {
    "discussion_file": {
        "type": "object",
        "required": ["nodes"],
        "properties": {
            "tree_id": {"type": "string"},
            "topic": {"type": ["string", "null"]},
            "users": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["id"],
                    "properties": {
                        "id": {"type": "string"},
                        "name": {"type": "string"},
                        "description": {"type": "string"},
                        "stance": {"enum": ["pro", "counter", "none"]},
                    },
                },
            },
            "nodes": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["author", "text"],
                    "properties": {
                        "id": {"type": "string"},
                        "author": {"type": "string"},
                        "text": {"type": "string"},
                        "parent": {"type": ["string", "null"]},
                    },
                    "additionalProperties": True,
                },
            },
        },
    },
    "draft_file": {
        "type": "object",
        "required": ["draft_id", "source_tree_id", "title", "turns"],
        "properties": {
            "draft_id": {"type": "string"},
            "source_tree_id": {"type": "string"},
            "title": {"type": "string"},
            "status": {"enum": ["in_progress", "final"]},
            "version": {"type": "integer"},
            "turns": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["index", "speaker", "addressees", "text"],
                    "properties": {
                        "index": {"type": "integer"},
                        "source_node_id": {"type": "string"},
                        "speaker": {"type": "string"},
                        "addressees": {
                            "oneOf": [
                                {"type": "array", "items": {"type": "string"}},
                                {"const": "everyone"},
                            ]
                        },
                        "text": {"type": "string"},
                        "provenance": {
                            "enum": ["original", "human_edited", "llm_accepted", "llm_modified"]
                        },
                    },
                },
            },
            "timing": {"type": "array", "items": {"type": "object"}},
        },
    },
    "export_file": {
        "description": "draft_file minus timing/version plus the speaker profiles used",
        "type": "object",
        "required": ["draft_id", "source_tree_id", "title", "turns", "users"],
    },
    "patch_commands": {
        "type": "object",
        "required": ["version", "commands"],
        "properties": {
            "version": {"type": "integer"},
            "commands": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["op"],
                    "properties": {
                        "op": {
                            "enum": [
                                "append_turn",
                                "reorder_turn",
                                "set_addressees",
                                "edit_text",
                                "remove_turn",
                                "set_status",
                                "set_title",
                            ]
                        }
                    },
                },
            },
        },
    },
    "refine_request": {
        "type": "object",
        "required": ["length", "style", "temperament"],
        "properties": {
            "length": {
                "enum": [
                    "much_shorter",
                    "slightly_shorter",
                    "same_length",
                    "slightly_longer",
                    "much_longer",
                ]
            },
            "style": {"enum": ["sarcastic", "aggressive", "exuberant", "cynic", "detached"]},
            "temperament": {"enum": ["neutral", "informal", "expressive", "concise", "formal"]},
        },
    },
    "decision_request": {
        "type": "object",
        "required": ["suggestion_id", "decision"],
        "properties": {
            "suggestion_id": {"type": "string"},
            "decision": {"enum": ["accepted", "modified", "rejected"]},
            "edited_text": {"type": "string"},
        },
    },
    "judgment_csv": {
        "description": "CSV with header pair_id,evaluator,dimension,verdict",
        "dimensions": [
            "naturalness",
            "variability",
            "engagement",
            "general",
            "length",
            "style",
            "temperament",
        ],
        "verdicts": ["A", "tie", "B"],
    },
    "error": {
        "type": "object",
        "required": ["code", "message"],
        "properties": {
            "code": {"enum": ["bad_request", "not_found", "conflict", "upstream_llm", "internal"]},
            "message": {"type": "string"},
            "detail": {"type": "object"},
        },
    },
}
