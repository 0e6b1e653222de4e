import { makeNodeBox } from './node-box.js';
import type { TreePayload } from './types.js';

const COLUMN_WIDTH = 200;
const ROW_HEIGHT = 64;
const BOX_WIDTH = 180;
const BOX_HEIGHT = 48;

interface LayoutEntry {
  depth: number;
  row: number;
}

/** Layered tidy layout: one column per depth, leaves stacked in traversal
 * order, every internal node centered on its children. */
export function layoutTree(tree: TreePayload): Map<string, LayoutEntry> {
  const layout = new Map<string, LayoutEntry>();
  let nextLeafRow = 0;

  const place = (nodeId: string, depth: number): number => {
    const node = tree.nodes[nodeId];
    let row: number;
    if (node.children.length === 0) {
      row = nextLeafRow;
      nextLeafRow += 1;
    } else {
      const childRows = node.children.map((child) => place(child, depth + 1));
      row = (childRows[0] + childRows[childRows.length - 1]) / 2;
    }
    layout.set(nodeId, { depth, row });
    return row;
  };

  place(tree.root_id, 0);
  return layout;
}

export interface TreeViewOptions {
  selectedNodeId: string | null;
  onSelect: (nodeId: string) => void;
}

export function renderGlobalTree(
  container: HTMLElement,
  tree: TreePayload,
  colors: Map<string, string>,
  options: TreeViewOptions,
): void {
  container.textContent = '';
  container.classList.add('tree-canvas');
  const layout = layoutTree(tree);

  let maxDepth = 0;
  let maxRow = 0;
  for (const entry of layout.values()) {
    maxDepth = Math.max(maxDepth, entry.depth);
    maxRow = Math.max(maxRow, entry.row);
  }
  const width = (maxDepth + 1) * COLUMN_WIDTH;
  const height = (maxRow + 1) * ROW_HEIGHT;
  container.style.width = `${width}px`;
  container.style.height = `${height}px`;

  const edges = document.createElementNS('http://www.w3.org/2000/svg', 'svg');
  edges.classList.add('tree-edges');
  edges.setAttribute('width', String(width));
  edges.setAttribute('height', String(height));
  for (const node of Object.values(tree.nodes)) {
    if (node.parent === null) continue;
    const from = layout.get(node.parent);
    const to = layout.get(node.id);
    if (!from || !to) continue;
    const path = document.createElementNS('http://www.w3.org/2000/svg', 'path');
    const x1 = from.depth * COLUMN_WIDTH + BOX_WIDTH;
    const y1 = from.row * ROW_HEIGHT + BOX_HEIGHT / 2;
    const x2 = to.depth * COLUMN_WIDTH;
    const y2 = to.row * ROW_HEIGHT + BOX_HEIGHT / 2;
    path.setAttribute('d', `M ${x1} ${y1} C ${x1 + 30} ${y1}, ${x2 - 30} ${y2}, ${x2} ${y2}`);
    path.setAttribute('class', 'tree-edge');
    edges.appendChild(path);
  }
  container.appendChild(edges);

  for (const nodeId of tree.order) {
    const node = tree.nodes[nodeId];
    const entry = layout.get(nodeId);
    if (!entry) continue;
    const box = makeNodeBox(node, tree.users, colors, {
      selected: nodeId === options.selectedNodeId,
      onSelect: options.onSelect,
    });
    box.style.position = 'absolute';
    box.style.left = `${entry.depth * COLUMN_WIDTH}px`;
    box.style.top = `${entry.row * ROW_HEIGHT}px`;
    container.appendChild(box);
  }
}

/** Shown instead of the tree when a fetch fails. */
export function renderTreePlaceholder(container: HTMLElement, message: string): void {
  container.textContent = '';
  const placeholder = document.createElement('div');
  placeholder.className = 'tree-placeholder';
  placeholder.textContent = message;
  container.appendChild(placeholder);
}
