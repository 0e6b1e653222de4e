// In-memory stand-in for the backend, speaking the documented REST contract.
// Reads come from payloads recorded against the real service; mutations
// mirror the server's draft-command semantics for the flows the UI tests
// exercise.

import type {
  Addressees,
  DraftCommand,
  DraftPayload,
  LintFinding,
  TreePayload,
  TurnPayload,
} from '../src/types.js';

interface FakeOptions {
  tree: TreePayload;
  suggestionText?: string;
  refineFails?: boolean;
  alwaysConflict?: boolean;
  networkDown?: boolean;
}

export class FakeBackend {
  readonly drafts = new Map<string, DraftPayload>();
  readonly suggestions = new Map<
    string,
    { draftId: string; index: number; text: string; decided: boolean }
  >();
  requests: string[] = [];
  private draftCounter = 0;
  private suggestionCounter = 0;

  constructor(readonly options: FakeOptions) {}

  get tree(): TreePayload {
    return this.options.tree;
  }

  fetch = async (input: string, init?: RequestInit): Promise<Response> => {
    if (this.options.networkDown) {
      throw new TypeError('network disabled');
    }
    const method = init?.method ?? 'GET';
    const url = new URL(input, 'http://fake');
    const path = url.pathname;
    this.requests.push(`${method} ${path}`);
    const body = init?.body ? (JSON.parse(String(init.body)) as Record<string, unknown>) : {};

    let match: RegExpMatchArray | null;
    if (method === 'GET' && (match = path.match(/^\/api\/trees\/([^/]+)$/))) {
      if (match[1] !== this.tree.tree_id) return error(404, 'not_found', 'unknown tree');
      return ok(this.tree);
    }
    if (method === 'GET' && (match = path.match(/^\/api\/trees\/([^/]+)\/nodes\/([^/]+)\/focus$/))) {
      const node = this.tree.nodes[match[2]];
      if (!node) return error(404, 'not_found', 'unknown node');
      return ok({
        parent: node.parent === null ? null : this.tree.nodes[node.parent],
        node,
        children: node.children.map((childId) => this.tree.nodes[childId]),
      });
    }
    if (method === 'POST' && path === '/api/drafts') {
      if (body.source_tree_id !== this.tree.tree_id) {
        return error(404, 'not_found', 'unknown tree');
      }
      this.draftCounter += 1;
      const draft: DraftPayload = {
        draft_id: `draft${this.draftCounter}`,
        source_tree_id: this.tree.tree_id,
        title: String(body.title ?? ''),
        status: 'in_progress',
        version: 0,
        turns: [],
        timing: [],
      };
      this.drafts.set(draft.draft_id, draft);
      return ok(draft, 201);
    }
    if ((match = path.match(/^\/api\/drafts\/([^/]+)$/))) {
      const draft = this.drafts.get(match[1]);
      if (!draft) return error(404, 'not_found', 'unknown draft');
      if (method === 'GET') return ok(draft);
      if (method === 'PATCH') {
        if (this.options.alwaysConflict || body.version !== draft.version) {
          return error(409, 'conflict', 'stale version');
        }
        const updated = this.applyCommands(draft, body.commands as DraftCommand[]);
        if (updated instanceof Response) return updated;
        updated.version = draft.version + 1;
        this.drafts.set(updated.draft_id, updated);
        return ok(updated);
      }
    }
    if (method === 'GET' && (match = path.match(/^\/api\/drafts\/([^/]+)\/lint$/))) {
      const draft = this.drafts.get(match[1]);
      if (!draft) return error(404, 'not_found', 'unknown draft');
      return ok({ findings: this.lint(draft) });
    }
    if (method === 'POST' && (match = path.match(/^\/api\/drafts\/([^/]+)\/turns\/(\d+)\/refine$/))) {
      if (this.options.refineFails) {
        return error(502, 'upstream_llm', 'provider exploded');
      }
      const draft = this.drafts.get(match[1]);
      const index = Number(match[2]);
      const turn = draft?.turns[index];
      if (!draft || !turn) return error(404, 'not_found', 'unknown turn');
      this.suggestionCounter += 1;
      const id = `sugg${this.suggestionCounter}`;
      const text = this.options.suggestionText ?? `refined: ${turn.text}`;
      this.suggestions.set(id, { draftId: draft.draft_id, index, text, decided: false });
      return ok({
        suggestion_id: id,
        draft_id: draft.draft_id,
        turn_index: index,
        original_text: turn.text,
        suggested_text: text,
        constraints: body,
        decision: 'pending',
        latency: 0.01,
      });
    }
    if (method === 'POST' && (match = path.match(/^\/api\/drafts\/([^/]+)\/turns\/(\d+)\/decision$/))) {
      const pending = this.suggestions.get(String(body.suggestion_id));
      const draft = this.drafts.get(match[1]);
      if (!pending || !draft || pending.draftId !== draft.draft_id) {
        return error(404, 'not_found', 'unknown suggestion');
      }
      if (pending.decided) return error(409, 'conflict', 'already decided');
      const decision = String(body.decision);
      pending.decided = true;
      let finalText: string | null = null;
      if (decision === 'accepted' || decision === 'modified') {
        finalText = decision === 'accepted' ? pending.text : String(body.edited_text ?? '');
        if (!finalText) return error(400, 'bad_request', "'modified' needs the edited text");
        const turns = [...draft.turns];
        turns[pending.index] = {
          ...turns[pending.index],
          text: finalText,
          provenance: decision === 'accepted' ? 'llm_accepted' : 'llm_modified',
        };
        draft.turns = turns;
        draft.version += 1;
      }
      return ok({
        draft,
        suggestion: {
          suggestion_id: body.suggestion_id,
          decision,
          final_text: finalText,
          token_count: finalText ? finalText.split(/\s+/).filter(Boolean).length : 0,
        },
      });
    }
    if (method === 'POST' && (match = path.match(/^\/api\/speakers\/([^/]+)\/([^/]+)\/profile\/refine$/))) {
      const profile = this.tree.users[match[2]];
      if (!profile) return error(404, 'not_found', 'unknown speaker');
      const previous = profile.description;
      profile.description = `sharper ${previous}`;
      return ok({ speaker: profile, previous_description: previous });
    }
    return error(404, 'not_found', `no route for ${method} ${path}`);
  };

  private applyCommands(draft: DraftPayload, commands: DraftCommand[]): DraftPayload | Response {
    let turns: TurnPayload[] = [...draft.turns];
    for (const command of commands) {
      if (command.op === 'append_turn' && command.node_id !== undefined) {
        const node = this.tree.nodes[command.node_id];
        if (!node) return error(404, 'not_found', 'unknown node');
        if (turns.some((turn) => turn.source_node_id === command.node_id)) {
          return error(400, 'bad_request', 'duplicate node');
        }
        const parentAuthor = node.parent === null ? null : this.tree.nodes[node.parent].author;
        const addressees: Addressees =
          parentAuthor === null || parentAuthor === node.author ? 'everyone' : [parentAuthor];
        turns.push({
          index: turns.length,
          speaker: node.author,
          addressees,
          text: node.text,
          provenance: 'original',
          source_node_id: node.id,
        });
      } else if (command.op === 'reorder_turn') {
        const [moved] = turns.splice(command.from, 1);
        turns.splice(command.to, 0, moved);
      } else if (command.op === 'edit_text') {
        const turn = turns[command.index];
        turns[command.index] = {
          ...turn,
          text: command.text,
          provenance: turn.provenance === 'original' ? 'human_edited' : turn.provenance,
        };
      } else if (command.op === 'remove_turn') {
        turns.splice(command.index, 1);
      } else if (command.op === 'set_addressees') {
        turns[command.index] = { ...turns[command.index], addressees: command.addressees };
      } else {
        return error(400, 'bad_request', `unsupported command ${command.op}`);
      }
      turns = turns.map((turn, index) => ({ ...turn, index }));
    }
    return { ...draft, turns };
  }

  private lint(draft: DraftPayload): LintFinding[] {
    const findings: LintFinding[] = [];
    const first = draft.turns[0];
    if (!first) {
      findings.push({ rule: 'R1', severity: 'warning', message: 'no opening turn', locus: null });
    } else {
      if (first.source_node_id !== undefined && first.source_node_id !== this.tree.root_id) {
        findings.push({ rule: 'R1', severity: 'warning', message: 'opener is not the root', locus: 0 });
      }
      if (first.addressees !== 'everyone') {
        findings.push({ rule: 'R1', severity: 'warning', message: 'opener must address everyone', locus: 0 });
      }
    }
    if (draft.turns.length < 10 || draft.turns.length > 15) {
      findings.push({
        rule: 'R2',
        severity: 'warning',
        message: `draft has ${draft.turns.length} turns, expected between 10 and 15`,
        locus: null,
      });
    }
    const speakers = new Set(draft.turns.map((turn) => turn.speaker));
    for (const userId of Object.keys(this.tree.users).sort()) {
      if (!speakers.has(userId)) {
        findings.push({ rule: 'R3', severity: 'warning', message: `user ${userId} never speaks`, locus: null });
      }
    }
    const edited = draft.turns.filter((turn) => turn.provenance !== 'original').length;
    if (draft.turns.length > 0 && edited / draft.turns.length > 0.5) {
      findings.push({ rule: 'R4', severity: 'warning', message: 'keep edits minimal', locus: null });
    }
    return findings;
  }
}

function ok(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { 'Content-Type': 'application/json' },
  });
}

function error(status: number, code: string, message: string): Response {
  return new Response(JSON.stringify({ code, message, detail: {} }), {
    status,
    headers: { 'Content-Type': 'application/json' },
  });
}
