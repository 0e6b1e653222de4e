import type { TreeNode, UserProfile } from './types.js';

const PREVIEW_CHARS = 70;

export interface NodeBoxOptions {
  selected?: boolean;
  onSelect?: (nodeId: string) => void;
}

/** One message box: author name in the top-right corner, message preview in
 * the center, expandable to the full text. */
export function makeNodeBox(
  node: TreeNode,
  users: Record<string, UserProfile>,
  colors: Map<string, string>,
  options: NodeBoxOptions = {},
): HTMLElement {
  const box = document.createElement('div');
  box.className = 'node-box';
  box.dataset.nodeId = node.id;
  box.dataset.author = node.author;
  if (options.selected) {
    box.classList.add('selected');
  }
  const color = colors.get(node.author) ?? '#999999';
  box.style.borderColor = color;

  const author = document.createElement('span');
  author.className = 'node-author';
  author.textContent = users[node.author]?.name ?? node.author;
  author.style.backgroundColor = color;
  box.appendChild(author);

  const preview = document.createElement('span');
  preview.className = 'node-preview';
  preview.textContent =
    node.text.length > PREVIEW_CHARS ? `${node.text.slice(0, PREVIEW_CHARS)}…` : node.text;
  preview.title = 'Click to expand';
  box.appendChild(preview);

  preview.addEventListener('click', (event) => {
    event.stopPropagation();
    const expanded = box.classList.toggle('expanded');
    preview.textContent = expanded
      ? node.text
      : node.text.length > PREVIEW_CHARS
        ? `${node.text.slice(0, PREVIEW_CHARS)}…`
        : node.text;
  });

  if (options.onSelect) {
    box.addEventListener('click', () => options.onSelect?.(node.id));
  }
  return box;
}
