// Wire types matching the backend's published schemas (GET /api/schema).

export interface UserProfile {
  id: string;
  name: string;
  description: string;
  stance?: 'pro' | 'counter' | 'none';
}

export interface TreeNode {
  id: string;
  author: string;
  text: string;
  parent: string | null;
  children: string[];
  attrs: Record<string, unknown>;
}

export interface TreePayload {
  tree_id: string;
  root_id: string;
  topic: string | null;
  users: Record<string, UserProfile>;
  nodes: Record<string, TreeNode>;
  order: string[];
}

export interface FocusPayload {
  parent: TreeNode | null;
  node: TreeNode;
  children: TreeNode[];
}

export type Addressees = string[] | 'everyone';

export type Provenance = 'original' | 'human_edited' | 'llm_accepted' | 'llm_modified';

export interface TurnPayload {
  index: number;
  speaker: string;
  addressees: Addressees;
  text: string;
  provenance: Provenance;
  source_node_id?: string;
}

export interface DraftPayload {
  draft_id: string;
  source_tree_id: string;
  title: string;
  status: 'in_progress' | 'final';
  version: number;
  turns: TurnPayload[];
  timing: unknown[];
}

export interface LintFinding {
  rule: 'R1' | 'R2' | 'R3' | 'R4';
  severity: 'warning';
  message: string;
  locus: number | null;
}

export interface Constraints {
  length: string;
  style: string;
  temperament: string;
}

export interface SuggestionPayload {
  suggestion_id: string;
  draft_id: string;
  turn_index: number;
  original_text: string;
  suggested_text: string;
  constraints: Constraints;
  decision: string;
  latency: number;
}

export interface DecisionResult {
  draft: DraftPayload;
  suggestion: {
    suggestion_id: string;
    decision: string;
    final_text: string | null;
    token_count: number;
  };
}

export interface SpeakerRefinement {
  speaker: UserProfile;
  previous_description: string | null;
}

export interface ApiErrorBody {
  code: 'bad_request' | 'not_found' | 'conflict' | 'upstream_llm' | 'internal';
  message: string;
  detail?: Record<string, unknown>;
}

export type DraftCommand =
  | { op: 'append_turn'; node_id?: string; text?: string; speaker?: string; addressees?: Addressees }
  | { op: 'reorder_turn'; from: number; to: number }
  | { op: 'set_addressees'; index: number; addressees: Addressees }
  | { op: 'edit_text'; index: number; text: string }
  | { op: 'remove_turn'; index: number }
  | { op: 'set_status'; status: 'in_progress' | 'final' }
  | { op: 'set_title'; title: string };

// The three constraint dimensions offer exactly five options each.
export const LENGTH_OPTIONS = [
  'much_shorter',
  'slightly_shorter',
  'same_length',
  'slightly_longer',
  'much_longer',
] as const;

export const STYLE_OPTIONS = ['sarcastic', 'aggressive', 'exuberant', 'cynic', 'detached'] as const;

export const TEMPERAMENT_OPTIONS = [
  'neutral',
  'informal',
  'expressive',
  'concise',
  'formal',
] as const;
