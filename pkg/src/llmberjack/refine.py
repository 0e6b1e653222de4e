"""LLM-assisted tasks: tree normalization, speaker profiling, message refinement.

Prompts are assembled from versioned text templates (``templates/``) with
named ``{SLOT}`` placeholders, so identical inputs always produce
byte-identical prompts. Every task is pinned to its sampling preset
(:data:`~llmberjack.transport.NORMALIZE`, :data:`~llmberjack.transport.PROFILE`,
:data:`~llmberjack.transport.REFINE`); calling with any other preset is a
contract violation.

The human stays in charge: a refinement suggestion starts out ``pending`` and
only :func:`apply_decision` (accept / modify / reject) touches the draft.
"""

from __future__ import annotations

import re
import time
from dataclasses import dataclass, replace
from enum import Enum
from importlib import resources

from .draft import Clock, DraftConversation, Turn, _utc_now
from .errors import (
    EmptyCompletion,
    EmptyText,
    MissingEditedText,
    NoEvidence,
    ParseError,
    SuggestionNotPending,
    UnknownSpeaker,
)
from .transport import NORMALIZE, PROFILE, REFINE, ChatTransport, GenerationConfig
from .tree import ReplyTree, SpeakerProfile, ensure_users, nodes_by_author, parse_discussion

DRAFT_EVIDENCE_THRESHOLD = 3


class Length(str, Enum):
    much_shorter = "much_shorter"
    slightly_shorter = "slightly_shorter"
    same_length = "same_length"
    slightly_longer = "slightly_longer"
    much_longer = "much_longer"


class Style(str, Enum):
    sarcastic = "sarcastic"
    aggressive = "aggressive"
    exuberant = "exuberant"
    cynic = "cynic"
    detached = "detached"


class Temperament(str, Enum):
    neutral = "neutral"
    informal = "informal"
    expressive = "expressive"
    concise = "concise"
    formal = "formal"


@dataclass(frozen=True)
class RefinementConstraints:
    """One pick per dimension: length, style, temperament."""

    length: Length
    style: Style
    temperament: Temperament

    def to_dict(self) -> dict:
        return {
            "length": self.length.value,
            "style": self.style.value,
            "temperament": self.temperament.value,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RefinementConstraints":
        return cls(
            length=Length(data["length"]),
            style=Style(data["style"]),
            temperament=Temperament(data["temperament"]),
        )


# One fixed English directive per option keeps adherence checkable.
LENGTH_DIRECTIVES = {
    Length.much_shorter: "Make the message much shorter than the original.",
    Length.slightly_shorter: "Make the message slightly shorter than the original.",
    Length.same_length: "Keep the message about the same length as the original.",
    Length.slightly_longer: "Make the message slightly longer than the original.",
    Length.much_longer: "Make the message much longer than the original.",
}
STYLE_DIRECTIVES = {
    Style.sarcastic: "Write in a sarcastic style.",
    Style.aggressive: "Write in an aggressive style.",
    Style.exuberant: "Write in an exuberant style.",
    Style.cynic: "Write in a cynic style.",
    Style.detached: "Write in a detached style.",
}
TEMPERAMENT_DIRECTIVES = {
    Temperament.neutral: "Keep a neutral temperament.",
    Temperament.informal: "Keep an informal temperament.",
    Temperament.expressive: "Keep an expressive temperament.",
    Temperament.concise: "Keep a concise temperament.",
    Temperament.formal: "Keep a formal temperament.",
}


def render_constraints(constraints: RefinementConstraints) -> str:
    return "\n".join(
        (
            LENGTH_DIRECTIVES[constraints.length],
            STYLE_DIRECTIVES[constraints.style],
            TEMPERAMENT_DIRECTIVES[constraints.temperament],
        )
    )


@dataclass
class PromptPair:
    system: str
    user: str


@dataclass
class RefinementSuggestion:
    original_text: str
    suggested_text: str
    constraints: RefinementConstraints
    decision: str = "pending"  # pending | accepted | modified | rejected
    final_text: str | None = None
    latency: float = 0.0
    token_count: int = 0


def whitespace_tokens(text: str) -> int:
    """Token count used for refinement-speed metrics: whitespace-delimited."""
    return len(text.split())


def load_template(name: str) -> str:
    return resources.files("llmberjack").joinpath(f"templates/{name}.txt").read_text("utf-8")


def render_template(template: str, slots: dict[str, str]) -> str:
    # Plain replacement, not str.format: slot values may contain braces.
    out = template
    for key, value in slots.items():
        out = out.replace("{" + key + "}", value)
    return out


# --- speaker profiling --------------------------------------------------------

def select_profile_evidence(
    draft: DraftConversation, tree: ReplyTree, speaker_id: str
) -> list[str]:
    """Evidence for profile refinement: the speaker's draft turns when there
    are at least three of them, otherwise all their tree messages (pre-order).
    """
    if speaker_id not in tree.users:
        raise UnknownSpeaker(speaker_id)
    draft_texts = [t.text for t in draft.turns if t.speaker_id == speaker_id]
    tree_texts = [n.text for n in nodes_by_author(tree, speaker_id)]
    if not draft_texts and not tree_texts:
        raise NoEvidence(speaker_id)
    if len(draft_texts) >= DRAFT_EVIDENCE_THRESHOLD:
        return draft_texts
    return tree_texts


def build_profile_prompt(profile: SpeakerProfile, evidence: list[str]) -> PromptPair:
    if not evidence:
        raise NoEvidence(profile.speaker_id)
    numbered = "\n".join(f"{i}. {text}" for i, text in enumerate(evidence, start=1))
    user = render_template(
        load_template("profile_user"),
        {"PROFILE": profile.description, "EVIDENCE": numbered},
    )
    return PromptPair(system=load_template("profile_system"), user=user)


def refine_profile(
    transport: ChatTransport, profile: SpeakerProfile, evidence: list[str]
) -> SpeakerProfile:
    """Replace the profile description with the model's merged version.

    The previous description is kept on the profile for auditing.
    """
    prompt = build_profile_prompt(profile, evidence)
    completion = _call(transport, PROFILE, prompt).strip()
    if not completion:
        raise EmptyCompletion("profile refinement returned no text")
    return replace(profile, description=completion, previous_description=profile.description)


# --- message refinement ---------------------------------------------------------

def build_refinement_prompt(
    message: str,
    context: list[Turn],
    profile: SpeakerProfile,
    constraints: RefinementConstraints,
) -> PromptPair:
    """Prompt for refining one message: the system part holds the full prior
    context (every turn before the target, in order), the profile and the
    constraint directives; the user part is the target message verbatim."""
    if not message.strip():
        raise EmptyText("cannot refine an empty message")
    if context:
        lines = [f"[{t.index}] {t.speaker_id}: {t.text}" for t in context]
        rendered_context = "\n".join(lines)
    else:
        rendered_context = "(no earlier messages)"
    system = render_template(
        load_template("refine_system"),
        {
            "PROFILE": profile.description,
            "CONTEXT": rendered_context,
            "CONSTRAINTS": render_constraints(constraints),
        },
    )
    return PromptPair(system=system, user=message)


def refine_message(
    transport: ChatTransport,
    draft: DraftConversation,
    tree: ReplyTree,
    turn_index: int,
    constraints: RefinementConstraints,
) -> RefinementSuggestion:
    """Ask the model for a revision of one turn; the result is pending until
    the annotator decides."""
    turn = draft.turn(turn_index)
    profile = tree.users.get(turn.speaker_id)
    if profile is None:
        raise UnknownSpeaker(turn.speaker_id)
    prompt = build_refinement_prompt(
        turn.text, list(draft.turns[:turn_index]), profile, constraints
    )
    start = time.perf_counter()
    completion = _call(transport, REFINE, prompt).strip()
    latency = time.perf_counter() - start
    if not completion:
        raise EmptyCompletion("refinement returned no text")
    return RefinementSuggestion(
        original_text=turn.text,
        suggested_text=completion,
        constraints=constraints,
        latency=latency,
    )


def apply_decision(
    draft: DraftConversation,
    turn_index: int,
    suggestion: RefinementSuggestion,
    decision: str,
    edited_text: str | None = None,
    clock: Clock | None = None,
) -> DraftConversation:
    """Resolve a pending suggestion: accept it verbatim, apply a human-modified
    version, or reject it (which leaves the draft untouched)."""
    if suggestion.decision != "pending":
        raise SuggestionNotPending(f"suggestion already {suggestion.decision}")
    turn = draft.turn(turn_index)

    if decision == "rejected":
        suggestion.decision = "rejected"
        return draft
    if decision == "accepted":
        final_text = suggestion.suggested_text
        provenance = "llm_accepted"
    elif decision == "modified":
        if not edited_text or not edited_text.strip():
            raise MissingEditedText("'modified' needs the edited text")
        final_text = edited_text
        provenance = "llm_modified"
    else:
        raise ValueError(f"unknown decision {decision!r}")

    suggestion.decision = decision
    suggestion.final_text = final_text
    suggestion.token_count = whitespace_tokens(final_text)

    stamp = (clock() if clock is not None else _utc_now()).isoformat()
    turns = list(draft.turns)
    turns[turn_index] = replace(
        turn,
        text=final_text,
        provenance=provenance,
        edit_log=turn.edit_log + [{"timestamp": stamp, "kind": provenance}],
    )
    return replace(draft, turns=turns)


# --- tree normalization ----------------------------------------------------------

DISCUSSION_SCHEMA_TEXT = """{
  "users": [ {"id": string, "name": string, "description": string, "stance"?: "pro"|"counter"|"none"} ],
  "nodes": [ {"id"?: string, "author": string, "text": string, "parent"?: string|null} ]
}
The "users" array is optional. Exactly one node has an absent or null "parent" (the root). Every other node's "parent" is the id of an existing node."""

_FENCE_RE = re.compile(r"^\s*```[a-zA-Z0-9_-]*\s*\n(.*?)\n?\s*```\s*$", re.DOTALL)


def strip_code_fences(text: str) -> str:
    """Models often wrap documents in ``` fences; unwrap a single outer fence."""
    match = _FENCE_RE.match(text)
    return match.group(1) if match else text


def build_normalize_prompt(raw: str) -> PromptPair:
    system = render_template(load_template("normalize_system"), {"SCHEMA": DISCUSSION_SCHEMA_TEXT})
    return PromptPair(system=system, user=raw)


def normalize_tree(transport: ChatTransport, raw: bytes | str) -> ReplyTree:
    """Repair a broken discussion dump through the model.

    The completion must parse as a discussion document; one retry is allowed,
    after which :class:`~llmberjack.errors.UnrepairableStructure` is raised.
    """
    from .errors import UnrepairableStructure

    if isinstance(raw, bytes):
        raw = raw.decode("utf-8", errors="replace")
    prompt = build_normalize_prompt(raw)
    last_error: ParseError | None = None
    for _ in range(2):
        completion = _call(transport, NORMALIZE, prompt)
        try:
            tree = parse_discussion(strip_code_fences(completion).strip())
        except ParseError as exc:
            last_error = exc
            continue
        return ensure_users(tree)
    raise UnrepairableStructure(f"completion still invalid after retry: {last_error}")


# --- internals --------------------------------------------------------------------

def _call(transport: ChatTransport, preset: GenerationConfig, prompt: PromptPair) -> str:
    assert preset in (NORMALIZE, PROFILE, REFINE), "LLM tasks must use their pinned preset"
    return transport.complete(preset, prompt.system, prompt.user)
