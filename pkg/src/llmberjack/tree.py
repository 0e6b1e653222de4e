"""Rooted reply trees: parsing, validation, querying and serialization.

A discussion document is UTF-8 JSON of the form::

    {
      "users": [ {"id": ..., "name": ..., "description": ..., "stance"?: ...} ],
      "nodes": [ {"id"?: ..., "author": ..., "text": ..., "parent"?: ..., ...extra} ]
    }

``users`` may be absent; :func:`ensure_users` fills the gaps with default
profiles. Exactly one node must have an absent/null parent (the root). Node
ids are accepted verbatim when present; missing ids are assigned dotted
paths by depth-first sibling index (root "1", its children "1.1", "1.2", ...).

Trees are treated as immutable after parsing; operations that change a tree
(:func:`ensure_users`) return a new value instead of editing in place, so
concurrent readers are safe.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, replace

from .errors import (
    CycleDetected,
    DanglingParent,
    DuplicateId,
    MalformedInput,
    MissingRoot,
    UnknownNode,
    UnknownSpeaker,
)

log = logging.getLogger(__name__)

DEFAULT_PROFILE_DESCRIPTION = "This is a telegram user"

STANCES = ("pro", "counter", "none")


@dataclass
class SpeakerProfile:
    """A participant's persona: free-text description plus optional stance."""

    speaker_id: str
    display_name: str
    description: str = ""
    stance: str | None = None
    previous_description: str | None = None  # audit trail for LLM refinements

    def to_dict(self) -> dict:
        out: dict = {
            "id": self.speaker_id,
            "name": self.display_name,
            "description": self.description,
        }
        if self.stance is not None:
            out["stance"] = self.stance
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "SpeakerProfile":
        stance = data.get("stance")
        if stance is not None and stance not in STANCES:
            raise MalformedInput(f"invalid stance {stance!r} for user {data.get('id')!r}")
        return cls(
            speaker_id=str(data["id"]),
            display_name=str(data.get("name", data["id"])),
            description=str(data.get("description", "")),
            stance=stance,
        )


@dataclass
class MessageNode:
    """One message: text, author, reply-to link and opaque platform extras."""

    id: str
    author_id: str
    text: str
    parent_id: str | None = None
    child_ids: list[str] = field(default_factory=list)
    attrs: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out: dict = {"id": self.id, "author": self.author_id, "text": self.text}
        if self.parent_id is not None:
            out["parent"] = self.parent_id
        out.update(self.attrs)
        return out


@dataclass
class ReplyTree:
    """A rooted tree of messages plus the speaker table."""

    tree_id: str
    root_id: str
    nodes: dict[str, MessageNode]
    users: dict[str, SpeakerProfile] = field(default_factory=dict)
    topic: str | None = None

    @property
    def root(self) -> MessageNode:
        return self.nodes[self.root_id]

    def node(self, node_id: str) -> MessageNode:
        try:
            return self.nodes[node_id]
        except KeyError:
            raise UnknownNode(node_id) from None

    def walk(self, start_id: str | None = None):
        """Depth-first pre-order traversal, children in stored order."""
        stack = [start_id if start_id is not None else self.root_id]
        while stack:
            node = self.node(stack.pop())
            yield node
            stack.extend(reversed(node.child_ids))

    def depth_of(self, node_id: str) -> int:
        """1-based depth: the root is at depth 1."""
        depth = 1
        node = self.node(node_id)
        while node.parent_id is not None:
            node = self.node(node.parent_id)
            depth += 1
        return depth

    def author_ids(self) -> list[str]:
        """Distinct authors in first-appearance (pre-order) order."""
        seen: list[str] = []
        for node in self.walk():
            if node.author_id not in seen:
                seen.append(node.author_id)
        return seen


# --- parsing ----------------------------------------------------------------

_NODE_KEYS = {"id", "author", "text", "parent"}


def parse_discussion(raw: bytes | str) -> ReplyTree:
    """Parse a discussion document into a validated :class:`ReplyTree`.

    Raises :class:`MalformedInput`, :class:`MissingRoot`, :class:`DuplicateId`,
    :class:`CycleDetected` or :class:`DanglingParent`; each carries the
    offending node id(s).
    """
    if isinstance(raw, bytes):
        try:
            raw = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedInput(f"not valid UTF-8: {exc}") from None
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise MalformedInput(f"not valid JSON: {exc}") from None
    return tree_from_document(doc)


def tree_from_document(doc: dict) -> ReplyTree:
    """Build a tree from an already-decoded discussion document."""
    if not isinstance(doc, dict):
        raise MalformedInput("top level must be a JSON object")
    raw_nodes = doc.get("nodes")
    if not isinstance(raw_nodes, list) or not raw_nodes:
        raise MalformedInput("document must contain a non-empty 'nodes' array")

    users: dict[str, SpeakerProfile] = {}
    raw_users = doc.get("users", [])
    if not isinstance(raw_users, list):
        raise MalformedInput("'users' must be an array")
    for entry in raw_users:
        if not isinstance(entry, dict) or "id" not in entry:
            raise MalformedInput("each user needs at least an 'id'")
        profile = SpeakerProfile.from_dict(entry)
        users[profile.speaker_id] = profile

    # First pass: materialize nodes under their input id, or a positional
    # placeholder when absent. Placeholders cannot be referenced as parents.
    nodes: dict[str, MessageNode] = {}
    placeholder_ids: set[str] = set()
    for position, entry in enumerate(raw_nodes):
        if not isinstance(entry, dict):
            raise MalformedInput(f"node at position {position} is not an object")
        if "author" not in entry:
            raise MalformedInput(f"node at position {position} has no author")
        if "text" not in entry or not isinstance(entry["text"], str):
            raise MalformedInput(f"node at position {position} has no text string")
        if "id" in entry and entry["id"] is not None:
            node_id = str(entry["id"])
        else:
            node_id = f"\x00anon{position}"
            placeholder_ids.add(node_id)
        if node_id in nodes:
            raise DuplicateId(f"duplicate node id {node_id!r}", (node_id,))
        parent = entry.get("parent")
        attrs = {k: v for k, v in entry.items() if k not in _NODE_KEYS}
        nodes[node_id] = MessageNode(
            id=node_id,
            author_id=str(entry["author"]),
            text=entry["text"],
            parent_id=None if parent is None else str(parent),
            attrs=attrs,
        )

    # Resolve parent links, preserving input order of children.
    roots = [n.id for n in nodes.values() if n.parent_id is None]
    if not roots:
        raise MissingRoot("no node without a parent", tuple(nodes))
    if len(roots) > 1:
        raise MalformedInput(
            f"multiple parentless nodes: {', '.join(sorted(roots))}", tuple(sorted(roots))
        )
    dangling = []
    for node in nodes.values():
        if node.parent_id is None:
            continue
        if node.parent_id not in nodes:
            dangling.append(node.id)
            continue
        nodes[node.parent_id].child_ids.append(node.id)
    if dangling:
        raise DanglingParent(
            f"parent not found for node(s): {', '.join(sorted(dangling))}",
            tuple(sorted(dangling)),
        )

    root_id = roots[0]
    reachable: set[str] = set()
    stack = [root_id]
    while stack:
        nid = stack.pop()
        if nid in reachable:
            continue
        reachable.add(nid)
        stack.extend(nodes[nid].child_ids)
    unreachable = sorted(set(nodes) - reachable)
    if unreachable:
        raise CycleDetected(
            f"node(s) unreachable from root (reply cycle): {', '.join(unreachable)}",
            tuple(unreachable),
        )

    _assign_generated_ids(nodes, root_id, placeholder_ids)
    root_id = next(n.id for n in nodes.values() if n.parent_id is None)

    tree_id = str(doc.get("tree_id", root_id))
    topic = doc.get("topic")
    tree = ReplyTree(
        tree_id=tree_id,
        root_id=root_id,
        nodes={n.id: n for n in _preorder(nodes, root_id)},
        users=users,
        topic=None if topic is None else str(topic),
    )
    for warning in validate_tree(tree):
        log.warning("%s: %s", tree_id, warning)
    return tree


def _preorder(nodes: dict[str, MessageNode], root_id: str) -> list[MessageNode]:
    out = []
    stack = [root_id]
    while stack:
        node = nodes[stack.pop()]
        out.append(node)
        stack.extend(reversed(node.child_ids))
    return out


def _assign_generated_ids(
    nodes: dict[str, MessageNode], root_id: str, placeholders: set[str]
) -> None:
    """Replace positional placeholders with dotted-path ids, in place."""
    if not placeholders:
        return
    renames: dict[str, str] = {}
    stack: list[tuple[str, str | None]] = [(root_id, "1" if root_id in placeholders else None)]
    while stack:
        node_id, assigned = stack.pop()
        node = nodes[node_id]
        final = assigned if assigned is not None else node.id
        if node.id in placeholders:
            renames[node.id] = final
        for index, child_id in enumerate(node.child_ids, start=1):
            child_assigned = f"{final}.{index}" if child_id in placeholders else None
            stack.append((child_id, child_assigned))
    for old, new in renames.items():
        if new in nodes and new not in placeholders and new != old:
            raise DuplicateId(f"generated id {new!r} collides with an input id", (new,))
    for old, new in renames.items():
        node = nodes.pop(old)
        node.id = new
        nodes[new] = node
    for node in nodes.values():
        if node.parent_id in renames:
            node.parent_id = renames[node.parent_id]
        node.child_ids = [renames.get(c, c) for c in node.child_ids]


def validate_tree(tree: ReplyTree) -> list[str]:
    """Soft checks: warnings only, parsing stays permissive."""
    warnings = []
    for node in tree.walk():
        if not node.text.strip():
            warnings.append(f"node {node.id!r} has empty text")
    missing = [a for a in tree.author_ids() if a not in tree.users]
    if missing:
        warnings.append(f"authors without profiles: {', '.join(missing)}")
    return warnings


# --- serialization ----------------------------------------------------------

def tree_to_document(tree: ReplyTree) -> dict:
    """Discussion document for ``tree``: users sorted by id, nodes pre-order."""
    doc: dict = {}
    if tree.topic is not None:
        doc["topic"] = tree.topic
    doc["tree_id"] = tree.tree_id
    doc["users"] = [tree.users[uid].to_dict() for uid in sorted(tree.users)]
    doc["nodes"] = [node.to_dict() for node in tree.walk()]
    return doc


def serialize_discussion(tree: ReplyTree) -> bytes:
    """Deterministic byte serialization (stable key order, stable node order)."""
    return json.dumps(tree_to_document(tree), ensure_ascii=False, sort_keys=True, indent=2).encode(
        "utf-8"
    )


# --- operations -------------------------------------------------------------

def ensure_users(tree: ReplyTree) -> ReplyTree:
    """Return a tree whose user table covers every author.

    Missing profiles are created with the default description; profiles with
    an empty description get the default text too. Profiles that already have
    a description are untouched. Idempotent.
    """
    users = dict(tree.users)
    changed = False
    for author in tree.author_ids():
        profile = users.get(author)
        if profile is None:
            users[author] = SpeakerProfile(
                speaker_id=author,
                display_name=author,
                description=DEFAULT_PROFILE_DESCRIPTION,
            )
            changed = True
        elif not profile.description:
            users[author] = replace(profile, description=DEFAULT_PROFILE_DESCRIPTION)
            changed = True
    if not changed:
        return tree
    return replace(tree, users=users)


def subtree(tree: ReplyTree, node_id: str) -> ReplyTree:
    """View of the tree rooted at ``node_id``: that node plus all descendants.

    The view shares the user table with the original tree. The view's root
    drops its parent link so the result is itself a valid tree.
    """
    root = tree.node(node_id)
    nodes: dict[str, MessageNode] = {}
    for node in tree.walk(node_id):
        nodes[node.id] = node
    if root.parent_id is not None:
        nodes[node_id] = replace(root, parent_id=None, child_ids=list(root.child_ids))
    return ReplyTree(
        tree_id=tree.tree_id,
        root_id=node_id,
        nodes=nodes,
        users=tree.users,
        topic=tree.topic,
    )


@dataclass
class FocusedView:
    """A node in context: its parent (absent for the root) and its children."""

    parent: MessageNode | None
    node: MessageNode
    children: list[MessageNode]


def focused_view(tree: ReplyTree, node_id: str) -> FocusedView:
    node = tree.node(node_id)
    parent = tree.node(node.parent_id) if node.parent_id is not None else None
    children = [tree.node(c) for c in node.child_ids]
    return FocusedView(parent=parent, node=node, children=children)


def nodes_by_author(tree: ReplyTree, speaker_id: str) -> list[MessageNode]:
    """All nodes authored by ``speaker_id`` in depth-first pre-order."""
    if speaker_id not in tree.users:
        raise UnknownSpeaker(speaker_id)
    return [node for node in tree.walk() if node.author_id == speaker_id]
