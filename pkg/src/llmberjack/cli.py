"""Command-line front door: serve, generate, normalize, lint, export, eval,
mock-llm.

Conventions: payload goes to stdout, diagnostics to stderr; exit 0 on
success, 1 on operation errors, 2 on usage errors. ``lint`` always exits 0
because the construction rules are soft.
"""

from __future__ import annotations

import json
from pathlib import Path

import click

from .config import Settings, load_settings
from .draft import lint_draft, parse_draft, export_conversation
from .errors import LlmberjackError, NoData
from .generate import GenerationSpec, StubDebateTransport, generate_tree
from .metrics import build_report, read_judgments_csv, read_sessions_csv, render_report
from .refine import normalize_tree
from .transport import EchoTransport, FixtureTransport, HttpChatTransport
from .tree import parse_discussion, serialize_discussion


def _fail(message: str) -> "click.exceptions.Exit":
    click.echo(f"error: {message}", err=True)
    return click.exceptions.Exit(1)


def _real_transport(settings: Settings):
    if not settings.llm_base_url:
        raise _fail("no LLM endpoint configured (set LLMBERJACK_LLM_BASE_URL or use --mock)")
    return HttpChatTransport(
        base_url=settings.llm_base_url, model=settings.model, api_key=settings.api_key
    )


@click.group()
@click.option("--config", "config_file", type=click.Path(exists=True), default=None,
              help="Config file with key = value overrides.")
@click.pass_context
def main(ctx: click.Context, config_file: str | None):
    """Build linearized multi-party conversations from debate reply trees."""
    ctx.obj = load_settings(config_file)


@main.command()
@click.option("--bind", default=None, help="host:port (default from settings)")
@click.pass_obj
def serve(settings: Settings, bind: str | None):
    """Run the HTTP service."""
    import uvicorn

    from .service import create_app

    if bind:
        settings = Settings(**{**settings.__dict__, "bind": bind})
    app = create_app(settings)
    uvicorn.run(app, host=settings.host, port=settings.port, log_level="info")


@main.command()
@click.option("--spec", "spec_path", required=True, type=click.Path(exists=True),
              help="Generation spec JSON: {topic, m, d, stances, seed}.")
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--mock", "mock_dir", type=click.Path(), default=None,
              help="Fixture directory; runs offline with recorded/stub completions.")
@click.pass_obj
def generate(settings: Settings, spec_path: str, out_path: str, mock_dir: str | None):
    """Generate a synthetic debate tree and write it as a discussion file."""
    try:
        spec = GenerationSpec.from_dict(json.loads(Path(spec_path).read_text("utf-8")))
    except (json.JSONDecodeError, KeyError) as exc:
        raise _fail(f"bad spec file: {exc}")
    if mock_dir is not None:
        transport = FixtureTransport(mock_dir, upstream=StubDebateTransport(), record=True)
    else:
        transport = _real_transport(settings)
    try:
        tree = generate_tree(transport, spec)
    except LlmberjackError as exc:
        raise _fail(str(exc))
    Path(out_path).write_bytes(serialize_discussion(tree))
    click.echo(f"wrote {len(tree.nodes)} nodes to {out_path}", err=True)


@main.command()
@click.option("--in", "input_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--mock", "mock_dir", type=click.Path(), default=None,
              help="Fixture directory; replays recorded repairs (identity for valid files).")
@click.pass_obj
def normalize(settings: Settings, input_path: str, out_path: str, mock_dir: str | None):
    """Repair a broken discussion dump into a valid discussion file."""
    raw = Path(input_path).read_bytes()
    if mock_dir is not None:
        transport = FixtureTransport(mock_dir, upstream=EchoTransport(), record=True)
    else:
        transport = _real_transport(settings)
    try:
        tree = normalize_tree(transport, raw)
    except LlmberjackError as exc:
        raise _fail(str(exc))
    Path(out_path).write_bytes(serialize_discussion(tree))
    click.echo(f"normalized tree with {len(tree.nodes)} nodes to {out_path}", err=True)


@main.command()
@click.option("--draft", "draft_path", required=True, type=click.Path(exists=True))
@click.option("--tree", "tree_path", required=True, type=click.Path(exists=True))
def lint(draft_path: str, tree_path: str):
    """Check the soft construction rules; warnings only, always exits 0."""
    try:
        draft = parse_draft(Path(draft_path).read_bytes())
        tree = parse_discussion(Path(tree_path).read_bytes())
        findings = lint_draft(draft, tree)
    except LlmberjackError as exc:
        raise _fail(str(exc))
    for finding in findings:
        locus = "" if finding.locus is None else f" [turn {finding.locus}]"
        click.echo(f"{finding.rule}{locus}: {finding.message}")


@main.command()
@click.option("--draft", "draft_path", required=True, type=click.Path(exists=True))
@click.option("--tree", "tree_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
def export(draft_path: str, tree_path: str, out_path: str):
    """Export a draft as a final-conversation JSON document."""
    try:
        draft = parse_draft(Path(draft_path).read_bytes())
        tree = parse_discussion(Path(tree_path).read_bytes())
        payload = export_conversation(draft, tree)
    except LlmberjackError as exc:
        raise _fail(str(exc))
    Path(out_path).write_bytes(payload)
    click.echo(f"exported {len(draft.turns)} turns to {out_path}", err=True)


@main.command("eval")
@click.option("--judgments", "judgments_path", required=True, type=click.Path(exists=True),
              help="CSV with header pair_id,evaluator,dimension,verdict.")
@click.option("--weights", type=click.Choice(["linear", "quadratic"]), default="linear")
@click.option("--sessions", "sessions_path", type=click.Path(exists=True), default=None,
              help="Optional CSV with session records for speed metrics.")
def eval_command(judgments_path: str, weights: str, sessions_path: str | None):
    """Compute preference percentages, weighted kappa and speeds."""
    try:
        judgments = read_judgments_csv(Path(judgments_path).read_text("utf-8"))
        sessions = (
            read_sessions_csv(Path(sessions_path).read_text("utf-8"))
            if sessions_path is not None
            else None
        )
        report = build_report(judgments, sessions, weights=weights)
    except NoData as exc:
        raise _fail(str(exc))
    except LlmberjackError as exc:
        raise _fail(str(exc))
    click.echo(render_report(report), nl=False)


@main.command("mock-llm")
@click.option("--fixtures", "fixtures_dir", required=True, type=click.Path())
@click.option("--bind", default="127.0.0.1:8099")
@click.option("--upstream", "upstream_url", default=None,
              help="Real provider base URL; misses are forwarded and recorded.")
@click.pass_obj
def mock_llm(settings: Settings, fixtures_dir: str, bind: str, upstream_url: str | None):
    """Serve recorded chat completions over the provider wire protocol."""
    import uvicorn

    from .mock_llm import create_mock_llm_app

    host, _, port = bind.rpartition(":")
    app = create_mock_llm_app(fixtures_dir, upstream_url, settings.model)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port), log_level="info")


if __name__ == "__main__":
    main()
