"""Linearized multi-party conversations built from a reply tree.

A draft is an ordered list of turns, each with a speaker, an addressee set
(or the distinguished value :data:`EVERYONE`) and edit provenance. Drafts are
edited functionally: every operation returns a new draft, which keeps
concurrent readers safe and leaves write serialization to the storage layer.

The draft-file format (UTF-8 JSON)::

    { "draft_id", "source_tree_id", "title", "status", "version",
      "turns": [ {"index", "source_node_id"?, "speaker",
                  "addressees": [...] | "everyone", "text", "provenance",
                  "edit_log": [...]} ],
      "timing": [ {"turn_added_at": iso8601}, ... ] }

The export format is the same minus ``timing``/``version``, plus the speaker
profiles that were used (``users``).
"""

from __future__ import annotations

import json
import uuid
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from typing import Callable

from .errors import (
    DuplicateSourceNode,
    EmptyAddresseeSet,
    EmptyText,
    IndexOutOfRange,
    InvalidAddressees,
    MalformedInput,
    UnknownSpeaker,
)
from .tree import ReplyTree

EVERYONE = "everyone"

PROVENANCES = ("original", "human_edited", "llm_accepted", "llm_modified")

Clock = Callable[[], datetime]


def _utc_now() -> datetime:
    return datetime.now(timezone.utc)


@dataclass
class Turn:
    index: int
    speaker_id: str
    text: str
    addressees: frozenset[str] | str = EVERYONE
    source_node_id: str | None = None
    provenance: str = "original"
    edit_log: list[dict] = field(default_factory=list)

    def addressee_list(self) -> list[str] | str:
        if self.addressees == EVERYONE:
            return EVERYONE
        return sorted(self.addressees)

    def to_dict(self) -> dict:
        out: dict = {
            "index": self.index,
            "speaker": self.speaker_id,
            "addressees": self.addressee_list(),
            "text": self.text,
            "provenance": self.provenance,
        }
        if self.source_node_id is not None:
            out["source_node_id"] = self.source_node_id
        if self.edit_log:
            out["edit_log"] = list(self.edit_log)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "Turn":
        addressees = data.get("addressees")
        if addressees == EVERYONE:
            parsed: frozenset[str] | str = EVERYONE
        elif isinstance(addressees, list) and addressees:
            parsed = frozenset(str(a) for a in addressees)
        else:
            raise MalformedInput(f"turn {data.get('index')}: bad addressees {addressees!r}")
        provenance = data.get("provenance", "original")
        if provenance not in PROVENANCES:
            raise MalformedInput(f"turn {data.get('index')}: bad provenance {provenance!r}")
        if not isinstance(data.get("text"), str) or not data["text"]:
            raise MalformedInput(f"turn {data.get('index')}: text must be non-empty")
        return cls(
            index=int(data["index"]),
            speaker_id=str(data["speaker"]),
            text=data["text"],
            addressees=parsed,
            source_node_id=(
                None if data.get("source_node_id") is None else str(data["source_node_id"])
            ),
            provenance=provenance,
            edit_log=list(data.get("edit_log", [])),
        )


@dataclass
class DraftConversation:
    draft_id: str
    source_tree_id: str
    title: str
    turns: list[Turn] = field(default_factory=list)
    timing: list[dict] = field(default_factory=list)
    status: str = "in_progress"
    version: int = 0

    def turn(self, index: int) -> Turn:
        if not 0 <= index < len(self.turns):
            raise IndexOutOfRange(index, len(self.turns))
        return self.turns[index]

    def speakers(self) -> set[str]:
        return {t.speaker_id for t in self.turns}

    def source_node_ids(self) -> set[str]:
        return {t.source_node_id for t in self.turns if t.source_node_id is not None}


@dataclass
class LintFinding:
    """One soft-rule violation. Rules never fail a draft, they only warn."""

    rule: str  # R1..R4
    message: str
    locus: int | None = None
    severity: str = "warning"

    def to_dict(self) -> dict:
        return {
            "rule": self.rule,
            "severity": self.severity,
            "message": self.message,
            "locus": self.locus,
        }


# --- construction and editing -------------------------------------------------

def create_draft(tree: ReplyTree, title: str, draft_id: str | None = None) -> DraftConversation:
    return DraftConversation(
        draft_id=draft_id if draft_id is not None else uuid.uuid4().hex,
        source_tree_id=tree.tree_id,
        title=title,
    )


def _reindex(turns: list[Turn]) -> list[Turn]:
    return [replace(t, index=i) if t.index != i else t for i, t in enumerate(turns)]


def _check_addressees(speaker_id: str, addressees: frozenset[str] | str) -> frozenset[str] | str:
    if addressees == EVERYONE:
        return EVERYONE
    addressees = frozenset(addressees)
    if not addressees:
        raise EmptyAddresseeSet("addressee set must not be empty")
    if speaker_id in addressees:
        raise InvalidAddressees(f"speaker {speaker_id!r} cannot address itself")
    return addressees


def append_turn(
    draft: DraftConversation,
    tree: ReplyTree,
    node_id: str | None = None,
    text: str | None = None,
    speaker_id: str | None = None,
    addressees: frozenset[str] | str | None = None,
    clock: Clock = _utc_now,
) -> DraftConversation:
    """Append a turn sourced from a tree node, or a free-text turn.

    Defaults for node-sourced turns: the speaker is the node's author and the
    addressee is the author of the node's parent (EVERYONE for the root).
    Free-text turns need an explicit speaker and carry provenance
    ``human_edited``; node-sourced turns are ``original``.
    """
    if (node_id is None) == (text is None):
        raise ValueError("exactly one of node_id and text is required")

    if node_id is not None:
        node = tree.node(node_id)
        if node_id in draft.source_node_ids():
            raise DuplicateSourceNode(node_id)
        if not node.text.strip():
            raise EmptyText(f"node {node_id!r} has empty text")
        speaker = speaker_id if speaker_id is not None else node.author_id
        if addressees is None:
            if node.parent_id is None:
                addressees = EVERYONE
            else:
                parent_author = tree.node(node.parent_id).author_id
                # a self-reply cannot address its own speaker: open it up
                addressees = EVERYONE if parent_author == speaker else frozenset({parent_author})
        text_value = node.text
        provenance = "original"
    else:
        assert text is not None
        if not text.strip():
            raise EmptyText("free-text turn must have non-empty text")
        if speaker_id is None:
            raise UnknownSpeaker("<missing>")
        speaker = speaker_id
        if addressees is None:
            addressees = EVERYONE
        text_value = text
        provenance = "human_edited"

    if speaker not in tree.users:
        raise UnknownSpeaker(speaker)
    addressees = _check_addressees(speaker, addressees)
    if addressees != EVERYONE:
        unknown = sorted(a for a in addressees if a not in tree.users)
        if unknown:
            raise UnknownSpeaker(unknown[0])

    turn = Turn(
        index=len(draft.turns),
        speaker_id=speaker,
        text=text_value,
        addressees=addressees,
        source_node_id=node_id,
        provenance=provenance,
    )
    return replace(
        draft,
        turns=draft.turns + [turn],
        timing=draft.timing + [{"turn_added_at": clock().isoformat()}],
    )


def reorder_turn(draft: DraftConversation, from_index: int, to_index: int) -> DraftConversation:
    """Move one turn to a new position (stable for all other turns)."""
    size = len(draft.turns)
    for idx in (from_index, to_index):
        if not 0 <= idx < size:
            raise IndexOutOfRange(idx, size)
    if from_index == to_index:
        return draft
    turns = list(draft.turns)
    turn = turns.pop(from_index)
    turns.insert(to_index, turn)
    return replace(draft, turns=_reindex(turns))


def set_addressees(
    draft: DraftConversation, index: int, addressees: frozenset[str] | str
) -> DraftConversation:
    turn = draft.turn(index)
    checked = _check_addressees(turn.speaker_id, addressees)
    turns = list(draft.turns)
    turns[index] = replace(turn, addressees=checked)
    return replace(draft, turns=turns)


def edit_text(
    draft: DraftConversation, index: int, new_text: str, clock: Clock = _utc_now
) -> DraftConversation:
    """Replace a turn's text; identical text is a no-op.

    Provenance moves one way only: original -> human_edited and
    llm_accepted -> llm_modified; it never returns to original.
    """
    turn = draft.turn(index)
    if not new_text.strip():
        raise EmptyText("turn text must be non-empty")
    if new_text == turn.text:
        return draft
    provenance = {"original": "human_edited", "llm_accepted": "llm_modified"}.get(
        turn.provenance, turn.provenance
    )
    log_entry = {"timestamp": clock().isoformat(), "kind": "edit_text"}
    turns = list(draft.turns)
    turns[index] = replace(
        turn, text=new_text, provenance=provenance, edit_log=turn.edit_log + [log_entry]
    )
    return replace(draft, turns=turns)


def remove_turn(draft: DraftConversation, index: int) -> DraftConversation:
    draft.turn(index)
    turns = [t for i, t in enumerate(draft.turns) if i != index]
    return replace(draft, turns=_reindex(turns))


def set_status(draft: DraftConversation, status: str) -> DraftConversation:
    if status not in ("in_progress", "final"):
        raise MalformedInput(f"bad draft status {status!r}")
    return replace(draft, status=status)


# --- linting ------------------------------------------------------------------

MIN_TURNS = 10
MAX_TURNS = 15
DEFAULT_EDITED_FRACTION_LIMIT = 0.5


def lint_draft(
    draft: DraftConversation,
    tree: ReplyTree,
    edited_fraction_limit: float = DEFAULT_EDITED_FRACTION_LIMIT,
) -> list[LintFinding]:
    """Check the four soft construction rules; deterministic output order.

    R1: the conversation opens with the tree root's message (or a deliberate
        free-text opener) addressed to everyone.
    R2: between 10 and 15 turns.
    R3: every known participant speaks at least once.
    R4: the share of edited turns stays small (advisory threshold).
    """
    findings: list[LintFinding] = []

    if not draft.turns:
        findings.append(LintFinding("R1", "draft has no opening turn"))
    else:
        opener = draft.turns[0]
        if opener.source_node_id is not None and opener.source_node_id != tree.root_id:
            findings.append(
                LintFinding(
                    "R1",
                    f"opening turn comes from node {opener.source_node_id!r}, "
                    f"not the root {tree.root_id!r}",
                    locus=0,
                )
            )
        if opener.addressees != EVERYONE:
            findings.append(
                LintFinding("R1", "opening turn must be addressed to everyone", locus=0)
            )

    n = len(draft.turns)
    if not MIN_TURNS <= n <= MAX_TURNS:
        findings.append(
            LintFinding("R2", f"draft has {n} turns, expected between {MIN_TURNS} and {MAX_TURNS}")
        )

    silent = sorted(set(tree.users) - draft.speakers())
    for speaker in silent:
        findings.append(LintFinding("R3", f"user {speaker!r} never speaks"))

    if n:
        edited = sum(1 for t in draft.turns if t.provenance != "original")
        fraction = edited / n
        if fraction > edited_fraction_limit:
            findings.append(
                LintFinding(
                    "R4",
                    f"{edited} of {n} turns were edited "
                    f"({fraction:.0%} > {edited_fraction_limit:.0%}); keep edits minimal",
                )
            )

    findings.sort(key=lambda f: (f.rule, f.locus if f.locus is not None else -1, f.message))
    return findings


# --- persistence ----------------------------------------------------------------

def draft_to_document(draft: DraftConversation) -> dict:
    return {
        "draft_id": draft.draft_id,
        "source_tree_id": draft.source_tree_id,
        "title": draft.title,
        "status": draft.status,
        "version": draft.version,
        "turns": [t.to_dict() for t in draft.turns],
        "timing": list(draft.timing),
    }


def serialize_draft(draft: DraftConversation) -> bytes:
    return json.dumps(
        draft_to_document(draft), ensure_ascii=False, sort_keys=True, indent=2
    ).encode("utf-8")


def draft_from_document(doc: dict) -> DraftConversation:
    if not isinstance(doc, dict):
        raise MalformedInput("draft document must be a JSON object")
    for key in ("draft_id", "source_tree_id", "title", "turns"):
        if key not in doc:
            raise MalformedInput(f"draft document missing {key!r}")
    status = doc.get("status", "in_progress")
    if status not in ("in_progress", "final"):
        raise MalformedInput(f"bad draft status {status!r}")
    turns = [Turn.from_dict(t) for t in doc["turns"]]
    for position, turn in enumerate(turns):
        if turn.index != position:
            raise MalformedInput(f"turn indices must be dense, got {turn.index} at {position}")
    return DraftConversation(
        draft_id=str(doc["draft_id"]),
        source_tree_id=str(doc["source_tree_id"]),
        title=str(doc["title"]),
        turns=turns,
        timing=list(doc.get("timing", [])),
        status=status,
        version=int(doc.get("version", 0)),
    )


def parse_draft(raw: bytes | str) -> DraftConversation:
    if isinstance(raw, bytes):
        raw = raw.decode("utf-8")
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise MalformedInput(f"not valid JSON: {exc}") from None
    return draft_from_document(doc)


def export_conversation(draft: DraftConversation, tree: ReplyTree) -> bytes:
    """Final-conversation export: turns plus the speaker profiles used."""
    doc = draft_to_document(draft)
    del doc["timing"]
    del doc["version"]
    speakers = sorted(draft.speakers() | {tree.node(n).author_id for n in draft.source_node_ids()})
    doc["users"] = [tree.users[s].to_dict() for s in speakers if s in tree.users]
    return json.dumps(doc, ensure_ascii=False, sort_keys=True, indent=2).encode("utf-8")


def drafts_equivalent(a: DraftConversation, b: DraftConversation) -> bool:
    """Structural equality up to timestamps (timing, edit-log clocks, version)."""

    def essence(d: DraftConversation):
        return (
            d.draft_id,
            d.source_tree_id,
            d.title,
            d.status,
            [
                (
                    t.index,
                    t.speaker_id,
                    t.text,
                    t.addressee_list(),
                    t.source_node_id,
                    t.provenance,
                )
                for t in d.turns
            ],
        )

    return essence(a) == essence(b)
