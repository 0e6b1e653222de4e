// View state and the author color map: one stable, distinct color per
// speaker, assigned from a fixed 10-color categorical palette by speaker-id
// sort so colors survive reloads.

export const AUTHOR_PALETTE = [
  '#4e79a7',
  '#f28e2b',
  '#e15759',
  '#76b7b2',
  '#59a14f',
  '#edc948',
  '#b07aa1',
  '#ff9da7',
  '#9c755f',
  '#bab0ac',
] as const;

export type Panel = 'tree' | 'chat' | 'refine' | 'profiles';

export interface ViewState {
  activeTreeId: string | null;
  selectedNodeId: string | null;
  activeDraftId: string | null;
  panel: Panel;
  authorColors: Map<string, string>;
}

export function createViewState(): ViewState {
  return {
    activeTreeId: null,
    selectedNodeId: null,
    activeDraftId: null,
    panel: 'tree',
    authorColors: new Map(),
  };
}

export function assignAuthorColors(speakerIds: Iterable<string>): Map<string, string> {
  const colors = new Map<string, string>();
  const sorted = [...new Set(speakerIds)].sort();
  sorted.forEach((speaker, index) => {
    colors.set(speaker, AUTHOR_PALETTE[index % AUTHOR_PALETTE.length]);
  });
  return colors;
}
