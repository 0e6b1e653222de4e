import { makeNodeBox } from './node-box.js';
import type { FocusPayload, UserProfile } from './types.js';

export interface FocusViewOptions {
  onSelect: (nodeId: string) => void;
}

/** Fixed three-row panel: parent above, the selected node, children below.
 * Every box is clickable, so annotators can walk the tree step by step. */
export function renderFocusedView(
  container: HTMLElement,
  focus: FocusPayload,
  users: Record<string, UserProfile>,
  colors: Map<string, string>,
  options: FocusViewOptions,
): void {
  container.textContent = '';
  container.classList.add('focus-view');

  const parentRow = document.createElement('div');
  parentRow.className = 'focus-row focus-parent';
  if (focus.parent !== null) {
    parentRow.appendChild(makeNodeBox(focus.parent, users, colors, { onSelect: options.onSelect }));
  }
  container.appendChild(parentRow);

  const nodeRow = document.createElement('div');
  nodeRow.className = 'focus-row focus-node';
  nodeRow.appendChild(
    makeNodeBox(focus.node, users, colors, { selected: true, onSelect: options.onSelect }),
  );
  container.appendChild(nodeRow);

  const childrenRow = document.createElement('div');
  childrenRow.className = 'focus-row focus-children';
  for (const child of focus.children) {
    childrenRow.appendChild(makeNodeBox(child, users, colors, { onSelect: options.onSelect }));
  }
  container.appendChild(childrenRow);
}
