"""Acceptance suite: one test per release criterion, at pinned tolerances.

Run with ``pytest tests/test_acceptance.py``; a per-criterion PASS/FAIL line
is printed in the terminal summary.
"""

from __future__ import annotations

import json
import random
import time

import pytest
from fastapi.testclient import TestClient

from llmberjack.config import Settings
from llmberjack.draft import EVERYONE, create_draft, edit_text, lint_draft, set_addressees
from llmberjack.errors import (
    CycleDetected,
    DanglingParent,
    DuplicateId,
    MalformedInput,
    MissingRoot,
)
from llmberjack.generate import GenerationSpec, StubDebateTransport, expected_node_count, generate_tree
from llmberjack.metrics import (
    PairwiseJudgment,
    SessionRecord,
    preference_percentages,
    token_speed,
    turn_speed,
    weighted_cohen_kappa,
)
from llmberjack.refine import (
    RefinementConstraints,
    Length,
    Style,
    Temperament,
    build_refinement_prompt,
    normalize_tree,
    refine_message,
    refine_profile,
    select_profile_evidence,
)
from llmberjack.service import create_app
from llmberjack.transport import EchoTransport, ScriptedTransport
from llmberjack.tree import (
    DEFAULT_PROFILE_DESCRIPTION,
    ensure_users,
    parse_discussion,
    serialize_discussion,
)

from conftest import build_draft_from_nodes, full_mary_tree, make_discussion, random_discussion
from test_metrics import brute_force_kappa, random_verdicts

CONSTRAINTS = RefinementConstraints(Length.much_longer, Style.aggressive, Temperament.informal)


def random_spec(rng: random.Random) -> GenerationSpec:
    m = rng.randint(1, 4)
    d = rng.randint(1, 4)
    stances = {}
    ids = [f"u{i}" for i in range(1, m + 1)]
    for i, sid in enumerate(ids):
        stances[sid] = "pro" if i < (m + 1) // 2 else "counter"
    if m > 1 and "counter" not in stances.values():
        stances[ids[-1]] = "counter"
    return GenerationSpec(
        topic=f"topic {rng.randint(0, 999)}", m=m, d=d, stance_split=stances,
        rng_seed=rng.randint(0, 2**31),
    )


def test_c01_node_count_law():
    started = time.perf_counter()
    for m in range(1, 5):
        for d in range(1, 5):
            stances = {f"u{i}": ("pro" if i % 2 else "counter") for i in range(1, m + 1)}
            spec = GenerationSpec("count law", m, d, stances, rng_seed=m * 10 + d)
            tree = generate_tree(StubDebateTransport(), spec)
            assert len(tree.nodes) == expected_node_count(m, d) == sum(m**i for i in range(d))
    tree = generate_tree(
        StubDebateTransport(),
        GenerationSpec("big", 4, 4, {"u1": "pro", "u2": "pro", "u3": "counter", "u4": "counter"},
                       rng_seed=42),
    )
    assert len(tree.nodes) == 85
    assert sum(1 for n in tree.nodes.values() if not n.child_ids) == 64
    assert time.perf_counter() - started < 5.0


def test_c02_generator_structural_invariants():
    started = time.perf_counter()
    rng = random.Random(2024)
    for _ in range(100):
        spec = random_spec(rng)
        tree = generate_tree(StubDebateTransport(), spec)
        users = sorted(spec.stance_split)
        for node in tree.nodes.values():
            depth = tree.depth_of(node.id)
            if depth < spec.d:
                authors = sorted(tree.nodes[c].author_id for c in node.child_ids)
                assert authors == users  # all m users, exactly once, self-reply included
            else:
                assert node.child_ids == []
    assert time.perf_counter() - started < 30.0


def test_c03_parse_round_trip_and_error_classes():
    rng = random.Random(31)
    for _ in range(1000):
        raw = random_discussion(rng)
        tree = parse_discussion(raw)
        payload = serialize_discussion(tree)
        assert serialize_discussion(parse_discussion(payload)) == payload

    with pytest.raises(MalformedInput):
        parse_discussion(b"{nope")
    with pytest.raises(MissingRoot):
        parse_discussion(make_discussion(
            [{"id": "a", "author": "x", "text": "t", "parent": "b"},
             {"id": "b", "author": "x", "text": "t", "parent": "a"}]))
    with pytest.raises(DuplicateId):
        parse_discussion(make_discussion(
            [{"id": "1", "author": "x", "text": "t"},
             {"id": "1", "author": "x", "text": "t", "parent": "1"}]))
    with pytest.raises(CycleDetected):
        parse_discussion(make_discussion(
            [{"id": "1", "author": "x", "text": "t"},
             {"id": "a", "author": "x", "text": "t", "parent": "b"},
             {"id": "b", "author": "x", "text": "t", "parent": "a"}]))
    with pytest.raises(DanglingParent):
        parse_discussion(make_discussion(
            [{"id": "1", "author": "x", "text": "t"},
             {"id": "1.2", "author": "x", "text": "t", "parent": "1.9"}]))


def test_c04_default_profile_rule_byte_exact():
    rng = random.Random(4)
    for _ in range(25):
        doc = json.loads(random_discussion(rng).decode())
        doc.pop("users", None)
        tree = ensure_users(parse_discussion(json.dumps(doc).encode()))
        authors = {n["author"] for n in doc["nodes"]}
        assert set(tree.users) == authors
        for profile in tree.users.values():
            assert profile.description == "This is a telegram user"
    assert DEFAULT_PROFILE_DESCRIPTION == "This is a telegram user"


def test_c05_evidence_selection_boundary():
    rng = random.Random(55)
    tree = parse_discussion(full_mary_tree(4, 3))
    for _ in range(200):
        speaker = rng.choice(["u1", "u2", "u3", "u4"])
        own = [n.id for n in tree.walk() if n.author_id == speaker]
        others = [n.id for n in tree.walk() if n.author_id != speaker]
        rng.shuffle(own)
        rng.shuffle(others)
        k = rng.choice([2, 3])  # straddle the boundary
        picks = own[:k] + others[: rng.randint(0, 3)]
        rng.shuffle(picks)
        draft = build_draft_from_nodes(tree, picks)
        evidence = select_profile_evidence(draft, tree, speaker)
        if k == 3:
            assert evidence == [t.text for t in draft.turns if t.speaker_id == speaker]
        else:
            assert evidence == [n.text for n in tree.walk() if n.author_id == speaker]


def test_c06_refinement_context_completeness():
    rng = random.Random(66)
    tree = parse_discussion(full_mary_tree(3, 3))
    pool = [n.id for n in tree.walk()]
    for _ in range(100):
        rng.shuffle(pool)
        draft = build_draft_from_nodes(tree, pool[: rng.randint(1, len(pool))])
        k = rng.randrange(len(draft.turns))
        prompt = build_refinement_prompt(
            draft.turns[k].text, list(draft.turns[:k]), tree.users["u1"], CONSTRAINTS
        )
        section = prompt.system.split("Conversation so far:\n", 1)[1]
        section = section.split("\n\nConstraints:", 1)[0]
        if k == 0:
            assert section == "(no earlier messages)"
            continue
        lines = section.split("\n")
        assert len(lines) == k
        for index, (line, turn) in enumerate(zip(lines, draft.turns[:k])):
            assert line == f"[{index}] {turn.speaker_id}: {turn.text}"


def test_c07_preset_pinning_on_every_call_path():
    tree = parse_discussion(full_mary_tree(4, 3))
    draft = build_draft_from_nodes(tree, ["1", "1.2", "1.3"])

    spy = EchoTransport()
    normalize_tree(spy, full_mary_tree(2, 2).decode())
    assert spy.calls[-1].config.as_tuple() == (0.0, 0.7, 8192, 42)

    spy = ScriptedTransport(["profile text"])
    refine_profile(spy, tree.users["u1"], ["msg"])
    assert spy.calls[-1].config.as_tuple() == (1.2, 0.9, 2048, 42)

    spy = ScriptedTransport(["refined text"])
    refine_message(spy, draft, tree, 1, CONSTRAINTS)
    assert spy.calls[-1].config.as_tuple() == (0.7, 0.9, 512, 42)

    # the same presets must be observed through the HTTP service paths
    def service_spy(replies):
        transport = ScriptedTransport(replies)
        app = create_app(Settings(data_dir=f"/tmp/accept-presets-{id(transport)}"),
                         transport=transport)
        return transport, TestClient(app, raise_server_exceptions=False)

    transport, client = service_spy(["profile text", "refined text", full_mary_tree(2, 2).decode()])
    doc = json.loads(full_mary_tree(4, 3).decode())
    tree_id = client.post("/api/files", json={"kind": "discussion", "document": doc}).json()["file_id"]
    draft_id = client.post("/api/drafts", json={"source_tree_id": tree_id, "title": "t"}).json()["draft_id"]
    client.patch(f"/api/drafts/{draft_id}",
                 json={"version": 0, "commands": [{"op": "append_turn", "node_id": "1"}]})
    assert client.post(f"/api/speakers/{tree_id}/u1/profile/refine", json={}).status_code == 200
    assert client.post(
        f"/api/drafts/{draft_id}/turns/0/refine",
        json={"length": "much_longer", "style": "aggressive", "temperament": "informal"},
    ).status_code == 200
    assert client.post(f"/api/trees/{tree_id}/normalize").status_code == 200
    configs = [c.config.as_tuple() for c in transport.calls]
    assert configs == [(1.2, 0.9, 2048, 42), (0.7, 0.9, 512, 42), (0.0, 0.7, 8192, 42)]


def test_c08_lint_rule_fixtures():
    tree = parse_discussion(full_mary_tree(4, 3))
    compliant = [
        "1", "1.2", "1.3", "1.4",
        "1.2.1", "1.2.2", "1.2.3", "1.2.4",
        "1.3.1", "1.3.2", "1.3.3", "1.3.4",
    ]
    assert lint_draft(build_draft_from_nodes(tree, compliant), tree) == []

    # R1: a 12-turn draft whose opener is u1's self-reply, not the root
    r1_draft = build_draft_from_nodes(tree, ["1.1"] + compliant[1:])
    r1_findings = lint_draft(r1_draft, tree)
    assert [f.rule for f in r1_findings] == ["R1"]
    assert "not the root" in r1_findings[0].message

    # R1 addressee variant: root opener but narrowed audience
    narrowed = set_addressees(build_draft_from_nodes(tree, compliant), 0, frozenset({"u2"}))
    findings = lint_draft(narrowed, tree)
    assert [f.rule for f in findings] == ["R1"]
    assert findings[0].locus == 0

    # R2: too short / too long, everything else satisfied
    nine = compliant[:8] + [compliant[8]]
    r2_findings = lint_draft(build_draft_from_nodes(tree, nine), tree)
    assert [f.rule for f in r2_findings] == ["R2"]

    # R3: u4 never speaks
    no_u4 = ["1", "1.1", "1.2", "1.3", "1.2.1", "1.2.2", "1.2.3", "1.3.1", "1.3.2", "1.3.3"]
    r3_findings = lint_draft(build_draft_from_nodes(tree, no_u4), tree)
    assert [f.rule for f in r3_findings] == ["R3"]
    assert "u4" in r3_findings[0].message

    # R4: more than half the turns edited
    edited = build_draft_from_nodes(tree, compliant)
    for i in range(7):
        edited = edit_text(edited, i, f"rewritten {i}")
    r4_findings = lint_draft(edited, tree)
    assert [f.rule for f in r4_findings] == ["R4"]


def test_c09_weighted_kappa_against_brute_force():
    rng = random.Random(99)
    checked = 0
    while checked < 500:
        n = rng.randint(1, 60)
        r1, r2 = random_verdicts(rng, n), random_verdicts(rng, n)
        scheme = rng.choice(["linear", "quadratic"])
        try:
            expected = brute_force_kappa(r1, r2, scheme)
        except ZeroDivisionError:
            if r1 == r2:
                assert weighted_cohen_kappa(r1, r2, scheme) == 1.0
            continue
        got = weighted_cohen_kappa(r1, r2, scheme)
        assert abs(got - expected) <= 1e-12
        assert abs(weighted_cohen_kappa(r2, r1, scheme) - got) <= 1e-12  # symmetry
        swap = {"A": "B", "B": "A", "tie": "tie"}
        relabeled = weighted_cohen_kappa([swap[v] for v in r1], [swap[v] for v in r2], scheme)
        assert abs(relabeled - got) <= 1e-12  # A/B relabel invariance
        checked += 1
    for x in (["A", "B", "tie", "A"], ["tie"] * 4, ["B", "B"]):
        assert weighted_cohen_kappa(x, x) == 1.0


def test_c10_table_shape_percentages():
    judgments = (
        [PairwiseJudgment(f"p{i}", "e1", "naturalness", "A") for i in range(21)]
        + [PairwiseJudgment(f"p{21 + i}", "e1", "naturalness", "B") for i in range(9)]
        + [PairwiseJudgment(f"p{30 + i}", "e1", "naturalness", "tie") for i in range(2)]
    )
    assert len(judgments) == 32
    pct = preference_percentages(judgments, "naturalness")
    assert pct["pct_A"] == 65.62
    assert pct["pct_B"] == 28.13
    assert pct["pct_tie"] == 6.25


def test_c11_speed_metrics_exact():
    assert turn_speed([SessionRecord("a", "selection", 15, 600.0)]) == 1.5
    assert token_speed([SessionRecord("a", "refinement", 0, 10.0, (3, 5))]) == 0.8


def test_c12_service_contract(tmp_path):
    transport = ScriptedTransport(["an llm suggestion"])
    app = create_app(Settings(data_dir=str(tmp_path / "data")), transport=transport)
    client = TestClient(app, raise_server_exceptions=False)

    # upload and validation
    doc = json.loads(full_mary_tree(4, 3).decode())
    created = client.post("/api/files", json={"kind": "discussion", "document": doc})
    assert created.status_code == 201
    tree_id = created.json()["file_id"]
    bad = client.post("/api/files", json={"kind": "discussion", "document": {"nodes": [
        {"id": "1", "author": "a", "text": "r"},
        {"id": "x", "author": "a", "text": "c", "parent": "zz"}]}})
    assert bad.status_code == 400 and bad.json()["detail"]["error"] == "DanglingParent"

    # tree reads
    assert client.get(f"/api/trees/{tree_id}").status_code == 200
    assert client.get(f"/api/trees/{tree_id}/nodes/1.2/focus").status_code == 200
    assert client.get(f"/api/trees/{tree_id}/nodes/1.2/subtree").status_code == 200
    assert client.get("/api/trees/ghost").status_code == 404

    # draft lifecycle with optimistic versions
    draft_id = client.post("/api/drafts", json={"source_tree_id": tree_id,
                                                "title": "t"}).json()["draft_id"]
    assert client.get("/api/drafts/ghost").status_code == 404
    ok = client.patch(f"/api/drafts/{draft_id}", json={"version": 0, "commands": [
        {"op": "append_turn", "node_id": "1"},
        {"op": "append_turn", "node_id": "1.2"}]})
    assert ok.status_code == 200 and ok.json()["version"] == 1
    stale = client.patch(f"/api/drafts/{draft_id}", json={"version": 0, "commands": [
        {"op": "remove_turn", "index": 0}]})
    assert stale.status_code == 409

    # lint + byte-stable export
    assert client.get(f"/api/drafts/{draft_id}/lint").status_code == 200
    export_one = client.get(f"/api/drafts/{draft_id}/export").content
    export_two = client.get(f"/api/drafts/{draft_id}/export").content
    assert export_one == export_two

    # refinement flow with the mock transport
    suggestion = client.post(
        f"/api/drafts/{draft_id}/turns/1/refine",
        json={"length": "same_length", "style": "detached", "temperament": "formal"},
    )
    assert suggestion.status_code == 200
    sid = suggestion.json()["suggestion_id"]
    decided = client.post(f"/api/drafts/{draft_id}/turns/1/decision",
                          json={"suggestion_id": sid, "decision": "accepted"})
    assert decided.status_code == 200
    assert decided.json()["draft"]["turns"][1]["provenance"] == "llm_accepted"

    # metrics and schema
    metrics = client.get("/api/metrics/session").json()
    assert metrics["refinement_sessions"] == 1
    assert client.get("/api/schema").status_code == 200
