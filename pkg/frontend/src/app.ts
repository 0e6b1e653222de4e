import { ApiClient, ApiError } from './api.js';
import { renderChatBuilder } from './chat-builder.js';
import { renderFocusedView } from './focus-view.js';
import { renderProfiles } from './profiles.js';
import { renderRefinePanel } from './refine-panel.js';
import { assignAuthorColors, createViewState, type Panel, type ViewState } from './state.js';
import { renderGlobalTree, renderTreePlaceholder } from './tree-view.js';
import type {
  Constraints,
  DraftCommand,
  DraftPayload,
  FocusPayload,
  LintFinding,
  SuggestionPayload,
  TreePayload,
} from './types.js';

const PANELS: Panel[] = ['tree', 'chat', 'refine', 'profiles'];

/** The annotator app. All state changes flow through the REST API: local
 * state is only ever replaced by server responses, except for optimistic
 * reorder/edit previews, which are rolled back when the server says no. */
export class App {
  readonly state: ViewState = createViewState();
  tree: TreePayload | null = null;
  focus: FocusPayload | null = null;
  draft: DraftPayload | null = null;
  findings: LintFinding[] = [];
  suggestion: SuggestionPayload | null = null;
  refineTarget: number | null = null;
  upstreamError: string | null = null;
  conflict = false;

  private readonly treePane: HTMLElement;
  private readonly focusPane: HTMLElement;
  private readonly sidePane: HTMLElement;
  private readonly tabsBar: HTMLElement;
  private pollTimer: ReturnType<typeof setInterval> | null = null;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient,
  ) {
    this.tabsBar = document.createElement('nav');
    this.tabsBar.className = 'tabs';
    this.treePane = document.createElement('section');
    this.treePane.id = 'tree-pane';
    this.focusPane = document.createElement('section');
    this.focusPane.id = 'focus-pane';
    this.sidePane = document.createElement('section');
    this.sidePane.id = 'side-pane';
    const main = document.createElement('main');
    main.className = 'layout';
    const left = document.createElement('div');
    left.className = 'left-column';
    left.append(this.treePane, this.focusPane);
    main.append(left, this.sidePane);
    this.root.textContent = '';
    this.root.append(this.tabsBar, main);
    this.render();
  }

  // --- data loading ---------------------------------------------------------

  async loadTree(treeId: string): Promise<void> {
    try {
      this.tree = await this.api.getTree(treeId);
    } catch (error) {
      renderTreePlaceholder(this.treePane, `Could not load tree ${treeId}: ${describe(error)}`);
      return;
    }
    this.state.activeTreeId = treeId;
    this.state.selectedNodeId = null;
    this.state.authorColors = assignAuthorColors(Object.keys(this.tree.users));
    this.focus = null;
    this.render();
  }

  async selectNode(nodeId: string): Promise<void> {
    if (this.state.activeTreeId === null) return;
    try {
      this.focus = await this.api.getFocus(this.state.activeTreeId, nodeId);
    } catch (error) {
      renderTreePlaceholder(this.focusPane, `Could not focus ${nodeId}: ${describe(error)}`);
      return;
    }
    this.state.selectedNodeId = nodeId;
    this.render();
  }

  async createDraft(title: string): Promise<void> {
    if (this.state.activeTreeId === null) return;
    this.draft = await this.api.createDraft(this.state.activeTreeId, title);
    this.state.activeDraftId = this.draft.draft_id;
    this.state.panel = 'chat';
    await this.refreshLint();
  }

  async openDraft(draftId: string): Promise<void> {
    this.draft = await this.api.getDraft(draftId);
    this.state.activeDraftId = draftId;
    this.state.panel = 'chat';
    await this.refreshLint();
  }

  setPanel(panel: Panel): void {
    this.state.panel = panel;
    this.render();
  }

  // --- draft mutations (all through PATCH commands) ---------------------------

  private async applyCommands(commands: DraftCommand[], preview?: DraftPayload): Promise<void> {
    if (this.draft === null) return;
    const before = this.draft;
    if (preview) {
      this.draft = preview; // optimistic
      this.render();
    }
    try {
      this.draft = await this.api.patchDraft(before.draft_id, before.version, commands);
      this.conflict = false;
    } catch (error) {
      this.draft = before; // roll back the preview
      if (error instanceof ApiError && error.isConflict) {
        this.conflict = true;
        try {
          this.draft = await this.api.getDraft(before.draft_id);
        } catch {
          // keep the previous snapshot when the reload also fails
        }
      } else {
        this.render();
        throw error;
      }
    }
    await this.refreshLint();
  }

  async addSelectedNode(): Promise<void> {
    if (this.state.selectedNodeId === null) return;
    await this.applyCommands([{ op: 'append_turn', node_id: this.state.selectedNodeId }]);
  }

  async reorderTurn(from: number, to: number): Promise<void> {
    if (this.draft === null) return;
    const turns = [...this.draft.turns];
    if (from < 0 || from >= turns.length || to < 0 || to >= turns.length) return;
    const [moved] = turns.splice(from, 1);
    turns.splice(to, 0, moved);
    const preview: DraftPayload = {
      ...this.draft,
      turns: turns.map((turn, index) => ({ ...turn, index })),
    };
    await this.applyCommands([{ op: 'reorder_turn', from, to }], preview);
  }

  async editTurnText(index: number, text: string): Promise<void> {
    await this.applyCommands([{ op: 'edit_text', index, text }]);
  }

  async removeTurn(index: number): Promise<void> {
    await this.applyCommands([{ op: 'remove_turn', index }]);
  }

  async setAddressees(index: number, addressees: string[] | 'everyone'): Promise<void> {
    await this.applyCommands([{ op: 'set_addressees', index, addressees }]);
  }

  async refreshLint(): Promise<void> {
    if (this.draft !== null) {
      try {
        this.findings = (await this.api.lintDraft(this.draft.draft_id)).findings;
      } catch {
        this.findings = [];
      }
    } else {
      this.findings = [];
    }
    this.render();
  }

  // --- refinement review ---------------------------------------------------------

  openRefine(index: number): void {
    this.refineTarget = index;
    this.suggestion = null;
    this.upstreamError = null;
    this.state.panel = 'refine';
    this.render();
  }

  async requestRefinement(constraints: Constraints): Promise<void> {
    if (this.draft === null || this.refineTarget === null) return;
    this.upstreamError = null;
    try {
      this.suggestion = await this.api.refineTurn(
        this.draft.draft_id,
        this.refineTarget,
        constraints,
      );
    } catch (error) {
      if (error instanceof ApiError && error.isUpstreamLlm) {
        this.upstreamError = error.body.message;
      } else {
        this.upstreamError = describe(error);
      }
    }
    this.render();
  }

  async decide(decision: 'accepted' | 'modified' | 'rejected', editedText?: string): Promise<void> {
    if (this.draft === null || this.refineTarget === null || this.suggestion === null) return;
    const result = await this.api.decideSuggestion(
      this.draft.draft_id,
      this.refineTarget,
      this.suggestion.suggestion_id,
      decision,
      editedText,
    );
    this.draft = result.draft;
    this.suggestion = null;
    this.state.panel = 'chat';
    await this.refreshLint();
  }

  async refineProfile(speakerId: string): Promise<void> {
    if (this.state.activeTreeId === null) return;
    try {
      await this.api.refineProfile(
        this.state.activeTreeId,
        speakerId,
        this.state.activeDraftId ?? undefined,
      );
    } catch (error) {
      if (error instanceof ApiError && error.isUpstreamLlm) {
        this.upstreamError = error.body.message;
        this.render();
        return;
      }
      throw error;
    }
    const treeId = this.state.activeTreeId;
    this.tree = await this.api.getTree(treeId);
    this.render();
  }

  // --- freshness polling -----------------------------------------------------------

  startPolling(intervalMs = 2000): void {
    this.stopPolling();
    this.pollTimer = setInterval(() => {
      void this.pollDraft();
    }, intervalMs);
  }

  stopPolling(): void {
    if (this.pollTimer !== null) {
      clearInterval(this.pollTimer);
      this.pollTimer = null;
    }
  }

  async pollDraft(): Promise<void> {
    if (this.draft === null) return;
    try {
      const fresh = await this.api.getDraft(this.draft.draft_id);
      if (fresh.version !== this.draft.version) {
        this.draft = fresh;
        await this.refreshLint();
      }
    } catch {
      // transient polling failures are ignored
    }
  }

  // --- rendering ----------------------------------------------------------------

  render(): void {
    this.renderTabs();
    if (this.tree !== null) {
      renderGlobalTree(this.treePane, this.tree, this.state.authorColors, {
        selectedNodeId: this.state.selectedNodeId,
        onSelect: (nodeId) => void this.selectNode(nodeId),
      });
      if (this.focus !== null) {
        renderFocusedView(this.focusPane, this.focus, this.tree.users, this.state.authorColors, {
          onSelect: (nodeId) => void this.selectNode(nodeId),
        });
      } else {
        this.focusPane.textContent = '';
      }
    }
    this.sidePane.textContent = '';
    if (this.state.panel === 'chat') {
      renderChatBuilder(this.sidePane, this.draft, this.tree, this.findings, this.conflict, {
        onAddSelected: () => void this.addSelectedNode(),
        onReorder: (from, to) => void this.reorderTurn(from, to),
        onEditText: (index, text) => void this.editTurnText(index, text),
        onRemove: (index) => void this.removeTurn(index),
        onSetAddressees: (index, addressees) => void this.setAddressees(index, addressees),
        onOpenRefine: (index) => this.openRefine(index),
      });
    } else if (this.state.panel === 'refine') {
      const original =
        this.refineTarget !== null && this.draft !== null
          ? (this.draft.turns[this.refineTarget]?.text ?? null)
          : null;
      renderRefinePanel(this.sidePane, this.refineTarget, original, this.suggestion,
        this.upstreamError, {
          onRequest: (constraints) => void this.requestRefinement(constraints),
          onAccept: () => void this.decide('accepted'),
          onModify: (text) => void this.decide('modified', text),
          onReject: () => void this.decide('rejected'),
        });
    } else if (this.state.panel === 'profiles') {
      renderProfiles(this.sidePane, this.tree, this.state.authorColors, {
        onRefineProfile: (speakerId) => void this.refineProfile(speakerId),
      });
    }
  }

  private renderTabs(): void {
    this.tabsBar.textContent = '';
    for (const panel of PANELS) {
      const tab = document.createElement('button');
      tab.className = panel === this.state.panel ? 'tab active' : 'tab';
      tab.dataset.panel = panel;
      tab.textContent = panel;
      tab.addEventListener('click', () => this.setPanel(panel));
      this.tabsBar.appendChild(tab);
    }
  }
}

function describe(error: unknown): string {
  return error instanceof Error ? error.message : String(error);
}
