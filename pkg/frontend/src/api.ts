import type {
  ApiErrorBody,
  Constraints,
  DecisionResult,
  DraftCommand,
  DraftPayload,
  FocusPayload,
  LintFinding,
  SpeakerRefinement,
  SuggestionPayload,
  TreePayload,
} from './types.js';

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly body: ApiErrorBody,
  ) {
    super(body.message);
  }

  get isConflict(): boolean {
    return this.status === 409;
  }

  get isUpstreamLlm(): boolean {
    return this.status === 502;
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/** Thin typed client over the REST API; every state change goes through here. */
export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method, headers: { 'Content-Type': 'application/json' } };
    if (body !== undefined) {
      init.body = JSON.stringify(body);
    }
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    if (!response.ok) {
      let parsed: ApiErrorBody;
      try {
        parsed = (await response.json()) as ApiErrorBody;
      } catch {
        parsed = { code: 'internal', message: `HTTP ${response.status}` };
      }
      throw new ApiError(response.status, parsed);
    }
    return (await response.json()) as T;
  }

  getTree(treeId: string): Promise<TreePayload> {
    return this.request('GET', `/api/trees/${treeId}`);
  }

  getFocus(treeId: string, nodeId: string): Promise<FocusPayload> {
    return this.request('GET', `/api/trees/${treeId}/nodes/${nodeId}/focus`);
  }

  createDraft(sourceTreeId: string, title: string): Promise<DraftPayload> {
    return this.request('POST', '/api/drafts', { source_tree_id: sourceTreeId, title });
  }

  getDraft(draftId: string): Promise<DraftPayload> {
    return this.request('GET', `/api/drafts/${draftId}`);
  }

  patchDraft(draftId: string, version: number, commands: DraftCommand[]): Promise<DraftPayload> {
    return this.request('PATCH', `/api/drafts/${draftId}`, { version, commands });
  }

  lintDraft(draftId: string): Promise<{ findings: LintFinding[] }> {
    return this.request('GET', `/api/drafts/${draftId}/lint`);
  }

  refineTurn(draftId: string, index: number, constraints: Constraints): Promise<SuggestionPayload> {
    return this.request('POST', `/api/drafts/${draftId}/turns/${index}/refine`, constraints);
  }

  decideSuggestion(
    draftId: string,
    index: number,
    suggestionId: string,
    decision: 'accepted' | 'modified' | 'rejected',
    editedText?: string,
  ): Promise<DecisionResult> {
    return this.request('POST', `/api/drafts/${draftId}/turns/${index}/decision`, {
      suggestion_id: suggestionId,
      decision,
      edited_text: editedText,
    });
  }

  refineProfile(treeId: string, speakerId: string, draftId?: string): Promise<SpeakerRefinement> {
    return this.request(
      'POST',
      `/api/speakers/${treeId}/${speakerId}/profile/refine`,
      draftId ? { draft_id: draftId } : {},
    );
  }
}
