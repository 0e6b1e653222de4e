"""Synthetic debate reply trees.

The construction mirrors a real group debate: the model first defines the
participants, a random participant opens the discussion, and then every node
receives one reply from each participant (self-replies included), repeated
recursively down to depth ``d``. With ``m`` users that yields

    node_count = 1 + m + m^2 + ... + m^(d-1)

messages (the root is depth 1). Each reply is conditioned only on the chain
from the root down to its parent plus the replying user's profile and stance,
so sibling subtrees are independent and reproducible: text sampling uses a
seed derived from the spec seed and the node id.

``StubDebateTransport`` is a deterministic offline stand-in for the model so
the full pipeline runs without a provider.
"""

from __future__ import annotations

import json
import random
import re
import zlib
from dataclasses import dataclass

from .errors import EmptyCompletion, MalformedInput, WrongUserCount
from .refine import (
    RefinementConstraints,
    Length,
    Style,
    Temperament,
    load_template,
    render_template,
    strip_code_fences,
)
from .transport import PROFILE, ChatTransport, GenerationConfig, prompt_hash
from .tree import MessageNode, ReplyTree, SpeakerProfile


@dataclass
class GenerationSpec:
    topic: str
    m: int
    d: int
    stance_split: dict[str, str]  # speaker id -> "pro" | "counter"
    rng_seed: int = 42

    def validate(self) -> None:
        if self.m < 1:
            raise MalformedInput(f"m must be >= 1, got {self.m}")
        if self.d < 1:
            raise MalformedInput(f"d must be >= 1, got {self.d}")
        if len(self.stance_split) != self.m:
            raise MalformedInput(
                f"stance_split has {len(self.stance_split)} speakers, expected m={self.m}"
            )
        bad = {s for s in self.stance_split.values() if s not in ("pro", "counter")}
        if bad:
            raise MalformedInput(f"invalid stances: {sorted(bad)}")

    @classmethod
    def from_dict(cls, data: dict) -> "GenerationSpec":
        spec = cls(
            topic=str(data["topic"]),
            m=int(data["m"]),
            d=int(data["d"]),
            stance_split={str(k): str(v) for k, v in data["stances"].items()},
            rng_seed=int(data.get("seed", 42)),
        )
        spec.validate()
        return spec


def default_spec(topic: str, rng_seed: int = 42) -> GenerationSpec:
    """The study-scale preset: 4 users, depth 4, two pro and two counter."""
    return GenerationSpec(
        topic=topic,
        m=4,
        d=4,
        stance_split={"u1": "pro", "u2": "pro", "u3": "counter", "u4": "counter"},
        rng_seed=rng_seed,
    )


def expected_node_count(m: int, d: int) -> int:
    """1 + m + m^2 + ... + m^(d-1), the size of a full generated tree."""
    if m < 1 or d < 1:
        raise MalformedInput(f"m and d must be >= 1, got m={m} d={d}")
    return sum(m**i for i in range(d))


def _text_config(base_seed: int, node_id: str) -> GenerationConfig:
    # Per-node derived seed keeps sibling subtrees independently reproducible.
    derived = zlib.crc32(f"{base_seed}:{node_id}".encode("utf-8"))
    return GenerationConfig(temperature=0.9, top_p=0.9, max_tokens=512, seed=derived)


def define_users(transport: ChatTransport, topic: str, spec: GenerationSpec) -> list[SpeakerProfile]:
    """Ask the model for one persona per participant; stances come from the spec."""
    spec.validate()
    participants = [
        {"id": sid, "stance": spec.stance_split[sid]} for sid in sorted(spec.stance_split)
    ]
    user = render_template(
        load_template("users_user"),
        {
            "TOPIC": topic,
            "COUNT": str(spec.m),
            "PARTICIPANTS": json.dumps(participants, ensure_ascii=False, indent=2),
        },
    )
    completion = transport.complete(PROFILE, load_template("users_system"), user)
    try:
        data = json.loads(strip_code_fences(completion).strip())
    except json.JSONDecodeError as exc:
        raise MalformedInput(f"user-definition completion is not JSON: {exc}") from None
    if not isinstance(data, list) or not all(isinstance(e, dict) for e in data):
        raise MalformedInput("user-definition completion must be a JSON array of objects")
    if len(data) != spec.m:
        raise WrongUserCount(f"expected {spec.m} profiles, model returned {len(data)}")
    got_ids = sorted(str(e.get("id")) for e in data)
    if got_ids != sorted(spec.stance_split):
        raise WrongUserCount(
            f"profile ids {got_ids} do not match participants {sorted(spec.stance_split)}"
        )
    profiles = []
    for entry in sorted(data, key=lambda e: str(e["id"])):
        sid = str(entry["id"])
        description = str(entry.get("description", "")).strip()
        if not description:
            raise EmptyCompletion(f"empty description for participant {sid!r}")
        profiles.append(
            SpeakerProfile(
                speaker_id=sid,
                display_name=str(entry.get("name", sid)),
                description=description,
                stance=spec.stance_split[sid],
            )
        )
    return profiles


def generate_tree(transport: ChatTransport, spec: GenerationSpec) -> ReplyTree:
    """Generate the full debate tree.

    Transport budget: one user-definition call plus exactly
    ``expected_node_count(m, d)`` text calls (the opener and one per reply).
    """
    spec.validate()
    profiles = define_users(transport, spec.topic, spec)
    users = {p.speaker_id: p for p in profiles}
    speaker_ids = sorted(spec.stance_split)
    rng = random.Random(spec.rng_seed)
    root_author = rng.choice(speaker_ids)
    system = load_template("generate_system")

    def speak(node_id: str, speaker_id: str, chain: list[MessageNode]) -> str:
        profile = users[speaker_id]
        slots = {
            "TOPIC": spec.topic,
            "SPEAKER": speaker_id,
            "STANCE": profile.stance or "none",
            "PROFILE": profile.description,
        }
        if chain:
            slots["CHAIN"] = "\n".join(f"{n.author_id}: {n.text}" for n in chain)
            user = render_template(load_template("reply_user"), slots)
        else:
            user = render_template(load_template("opener_user"), slots)
        completion = transport.complete(_text_config(spec.rng_seed, node_id), system, user)
        completion = completion.strip()
        if not completion:
            raise EmptyCompletion(f"model returned no text for node {node_id}")
        return completion

    nodes: dict[str, MessageNode] = {}
    root = MessageNode(id="1", author_id=root_author, text=speak("1", root_author, []))
    nodes[root.id] = root
    level = [root.id]
    for _depth in range(1, spec.d):
        next_level: list[str] = []
        for parent_id in level:
            chain = _chain_to(nodes, parent_id)
            for k, speaker_id in enumerate(speaker_ids, start=1):
                child_id = f"{parent_id}.{k}"
                child = MessageNode(
                    id=child_id,
                    author_id=speaker_id,
                    text=speak(child_id, speaker_id, chain),
                    parent_id=parent_id,
                )
                nodes[parent_id].child_ids.append(child_id)
                nodes[child_id] = child
                next_level.append(child_id)
        level = next_level

    return ReplyTree(
        tree_id=f"synthetic-m{spec.m}-d{spec.d}-s{spec.rng_seed}",
        root_id=root.id,
        nodes=nodes,
        users=users,
        topic=spec.topic,
    )


def _chain_to(nodes: dict[str, MessageNode], node_id: str) -> list[MessageNode]:
    chain = []
    current: str | None = node_id
    while current is not None:
        node = nodes[current]
        chain.append(node)
        current = node.parent_id
    chain.reverse()
    return chain


# --- study presets --------------------------------------------------------------

@dataclass(frozen=True)
class PresetTopic:
    key: str
    topic: str
    constraints: RefinementConstraints


def preset_topics() -> list[PresetTopic]:
    """The four study topics plus the tutorial one, each with its refinement
    constraint combination."""
    return [
        PresetTopic(
            "T1",
            "Legalization of marijuana in Italy",
            RefinementConstraints(Length.much_longer, Style.aggressive, Temperament.informal),
        ),
        PresetTopic(
            "T2",
            "Legalization of euthanasia in Italy",
            RefinementConstraints(Length.same_length, Style.exuberant, Temperament.expressive),
        ),
        PresetTopic(
            "T3",
            "Introduction of a four-day work week",
            RefinementConstraints(Length.slightly_shorter, Style.cynic, Temperament.concise),
        ),
        PresetTopic(
            "T4",
            "Serie A clubs should promote more Italian players rather than foreign stars",
            RefinementConstraints(Length.slightly_longer, Style.detached, Temperament.formal),
        ),
        PresetTopic(
            "tutorial",
            "Coca-Cola is better than Fanta",
            RefinementConstraints(Length.much_shorter, Style.sarcastic, Temperament.neutral),
        ),
    ]


# --- offline stand-in -------------------------------------------------------------

_SPEAKER_RE = re.compile(r"^You are (\S+) \((pro|counter|none) side\)\.$", re.MULTILINE)
_ARRAY_RE = re.compile(r"\[.*\]", re.DOTALL)


class StubDebateTransport:
    """Deterministic offline model for tree generation.

    Answers user-definition prompts with schematic personas for exactly the
    requested participants, and message prompts with short placeholder text
    derived from the prompt hash. Useful for tests, demos and fixture seeding.
    """

    def __init__(self):
        self.calls = []

    def complete(self, config: GenerationConfig, system: str, user: str) -> str:
        from .transport import TransportCall

        self.calls.append(TransportCall(config, system, user))
        if "Define exactly" in user:
            return self._personas(user)
        return self._message(system, user)

    @staticmethod
    def _personas(user: str) -> str:
        match = _ARRAY_RE.search(user)
        if match is None:
            return "[]"
        participants = json.loads(match.group(0))
        personas = [
            {
                "id": p["id"],
                "name": str(p["id"]).capitalize(),
                "description": (
                    f"A synthetic debater arguing the {p['stance']} side; "
                    "direct, consistent and a little stubborn."
                ),
            }
            for p in participants
        ]
        return json.dumps(personas, ensure_ascii=False, indent=2)

    @staticmethod
    def _message(system: str, user: str) -> str:
        speaker_match = _SPEAKER_RE.search(user)
        speaker = speaker_match.group(1) if speaker_match else "someone"
        tag = prompt_hash(system, user)[:8]
        if "opening message" in user:
            return f"{speaker} opens the debate with point {tag}."
        return f"{speaker} answers with point {tag}."
