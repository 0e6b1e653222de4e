from __future__ import annotations

import json
import random
from datetime import datetime, timedelta, timezone

import pytest

from llmberjack.draft import append_turn, create_draft
from llmberjack.tree import parse_discussion


def make_discussion(nodes: list[dict], users: list[dict] | None = None, **extra) -> bytes:
    doc: dict = {"nodes": nodes}
    if users is not None:
        doc["users"] = users
    doc.update(extra)
    return json.dumps(doc).encode("utf-8")


def four_users() -> list[dict]:
    return [
        {"id": "a", "name": "Ada", "description": "Opens strong.", "stance": "pro"},
        {"id": "b", "name": "Ben", "description": "Quotes numbers.", "stance": "pro"},
        {"id": "c", "name": "Cleo", "description": "Pushes back.", "stance": "counter"},
        {"id": "d", "name": "Dan", "description": "Asks questions.", "stance": "counter"},
    ]


@pytest.fixture
def fig_tree():
    """Hand-built tree shaped like the screenshot example: the focus node
    1.2.4 has parent 1.2 and two children."""
    authors = ["a", "b", "c", "d"]
    nodes = [{"id": "1", "author": "a", "text": "opening statement"}]
    for i in (1, 2, 3):
        nodes.append(
            {"id": f"1.{i}", "author": authors[i % 4], "text": f"reply {i}", "parent": "1"}
        )
    for i in (1, 2, 3, 4):
        nodes.append(
            {"id": f"1.2.{i}", "author": authors[(i + 1) % 4], "text": f"deep {i}", "parent": "1.2"}
        )
    for i in (1, 2):
        nodes.append(
            {
                "id": f"1.2.4.{i}",
                "author": authors[(i + 2) % 4],
                "text": f"deeper {i}",
                "parent": "1.2.4",
            }
        )
    return parse_discussion(make_discussion(nodes, four_users(), topic="test topic"))


def full_mary_tree(m: int, d: int) -> bytes:
    """Document for a complete m-ary tree of depth d with m users u1..um."""
    users = [
        {"id": f"u{i}", "name": f"U{i}", "description": f"user {i}",
         "stance": "pro" if i <= (m + 1) // 2 else "counter"}
        for i in range(1, m + 1)
    ]
    nodes = [{"id": "1", "author": "u1", "text": "root text"}]
    level = ["1"]
    for _ in range(d - 1):
        nxt = []
        for parent in level:
            for k in range(1, m + 1):
                nid = f"{parent}.{k}"
                nodes.append(
                    {"id": nid, "author": f"u{k}", "text": f"text {nid}", "parent": parent}
                )
                nxt.append(nid)
        level = nxt
    return make_discussion(nodes, users)


@pytest.fixture
def full_tree_m4():
    return parse_discussion(full_mary_tree(4, 4))


def random_discussion(rng: random.Random, max_nodes: int = 12) -> bytes:
    """A random valid discussion document (random shape, authors, extras)."""
    n = rng.randint(1, max_nodes)
    author_pool = [f"s{i}" for i in range(1, rng.randint(2, 5))]
    nodes = [
        {
            "id": "1",
            "author": rng.choice(author_pool),
            "text": f"msg 1 {rng.randint(0, 999)}",
        }
    ]
    ids = ["1"]
    child_counts = {"1": 0}
    for _ in range(n - 1):
        parent = rng.choice(ids)
        child_counts[parent] += 1
        nid = f"{parent}.{child_counts[parent]}"
        node = {
            "id": nid,
            "author": rng.choice(author_pool),
            "text": f"msg {nid} {rng.randint(0, 999)}",
            "parent": parent,
        }
        if rng.random() < 0.3:
            node["score"] = rng.randint(-5, 5)  # opaque platform extra
        nodes.append(node)
        ids.append(nid)
        child_counts[nid] = 0
    users = None
    if rng.random() < 0.5:
        users = [
            {"id": a, "name": a.upper(), "description": f"profile of {a}"} for a in author_pool
        ]
    return make_discussion(nodes, users)


class SteppingClock:
    """Deterministic clock advancing a fixed step per call."""

    def __init__(self, start: datetime | None = None, step_seconds: float = 1.0):
        self.now = start or datetime(2025, 6, 1, 12, 0, 0, tzinfo=timezone.utc)
        self.step = timedelta(seconds=step_seconds)

    def __call__(self) -> datetime:
        current = self.now
        self.now = current + self.step
        return current


def build_draft_from_nodes(tree, node_ids: list[str], clock=None, title="draft"):
    draft = create_draft(tree, title)
    kwargs = {"clock": clock} if clock is not None else {}
    for nid in node_ids:
        draft = append_turn(draft, tree, node_id=nid, **kwargs)
    return draft


# --- acceptance reporting: one PASS/FAIL line per criterion -----------------------

_ACCEPTANCE_RESULTS: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_c" in report.nodeid:
        if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
            _ACCEPTANCE_RESULTS[report.nodeid] = report.outcome


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_line("")
    terminalreporter.write_line("acceptance criteria:")
    for nodeid in sorted(_ACCEPTANCE_RESULTS):
        label = nodeid.split("::", 1)[1]
        outcome = _ACCEPTANCE_RESULTS[nodeid]
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"  {status}  {label}")
