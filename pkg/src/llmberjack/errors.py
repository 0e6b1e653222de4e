"""Exception hierarchy shared by every subsystem.

Parse-time errors carry the offending node id(s) so callers (and the HTTP
layer) can point at the broken part of an uploaded dump.
"""

from __future__ import annotations


class LlmberjackError(Exception):
    """Base class for all domain errors."""


# --- discussion parsing -----------------------------------------------------

class ParseError(LlmberjackError):
    """Structural problem in a discussion or draft document."""

    def __init__(self, message: str, node_ids: tuple[str, ...] = ()):
        super().__init__(message)
        self.node_ids = tuple(node_ids)


class MalformedInput(ParseError):
    """Input is not syntactically valid or violates the document schema."""


class MissingRoot(ParseError):
    """No node without a parent was found."""


class DuplicateId(ParseError):
    """Two nodes share the same id."""


class CycleDetected(ParseError):
    """Parent links form a cycle (nodes unreachable from the root)."""


class DanglingParent(ParseError):
    """A node references a parent id that does not exist."""


# --- lookups ----------------------------------------------------------------

class UnknownNode(LlmberjackError):
    def __init__(self, node_id: str):
        super().__init__(f"unknown node: {node_id!r}")
        self.node_id = node_id


class UnknownSpeaker(LlmberjackError):
    def __init__(self, speaker_id: str):
        super().__init__(f"unknown speaker: {speaker_id!r}")
        self.speaker_id = speaker_id


class UnknownTree(LlmberjackError):
    def __init__(self, tree_id: str):
        super().__init__(f"unknown tree: {tree_id!r}")
        self.tree_id = tree_id


class UnknownDraft(LlmberjackError):
    def __init__(self, draft_id: str):
        super().__init__(f"unknown draft: {draft_id!r}")
        self.draft_id = draft_id


class AlreadyExists(LlmberjackError):
    """An entry with the same id is already stored."""


# --- draft editing ----------------------------------------------------------

class DraftError(LlmberjackError):
    """Invalid edit on a draft conversation."""


class IndexOutOfRange(DraftError):
    def __init__(self, index: int, size: int):
        super().__init__(f"turn index {index} out of range for draft of {size} turns")
        self.index = index
        self.size = size


class EmptyText(DraftError):
    """A turn's text must be non-empty."""


class EmptyAddresseeSet(DraftError):
    """A turn must address at least one participant (or everyone)."""


class InvalidAddressees(DraftError):
    """Addressee set violates an invariant (e.g. speaker addressing itself)."""


class DuplicateSourceNode(DraftError):
    """The same tree node may appear at most once in a draft."""

    def __init__(self, node_id: str):
        super().__init__(f"node {node_id!r} is already part of this draft")
        self.node_id = node_id


class VersionConflict(LlmberjackError):
    """Optimistic version check failed on a concurrent write."""

    def __init__(self, expected: int, got: int):
        super().__init__(f"stale version {got}, current is {expected}")
        self.expected = expected
        self.got = got


# --- LLM assistance ---------------------------------------------------------

class TransportError(LlmberjackError):
    """The chat-completion provider failed.

    ``retryable`` distinguishes transient failures (timeouts, 429/5xx) from
    fatal ones (bad credentials, malformed request).
    """

    def __init__(self, message: str, retryable: bool = False):
        super().__init__(message)
        self.retryable = retryable


class EmptyCompletion(LlmberjackError):
    """The model returned an empty or whitespace-only completion."""


class UnrepairableStructure(LlmberjackError):
    """Normalization could not produce a valid discussion document."""


class NoEvidence(LlmberjackError):
    """A speaker has no messages in the draft nor in the tree."""

    def __init__(self, speaker_id: str):
        super().__init__(f"no evidence messages for speaker {speaker_id!r}")
        self.speaker_id = speaker_id


class MissingEditedText(LlmberjackError):
    """A 'modified' decision requires the edited text."""


class SuggestionNotPending(LlmberjackError):
    """The suggestion was already accepted, modified or rejected."""


class WrongUserCount(LlmberjackError):
    """The model returned profiles for the wrong set of participants."""


# --- evaluation -------------------------------------------------------------

class NoData(LlmberjackError):
    """No records available for the requested computation."""


class LengthMismatch(LlmberjackError):
    """Rater verdict lists must be aligned and equally long."""


class DegenerateMarginals(LlmberjackError):
    """Expected disagreement is zero and agreement is undefined."""
