import type { DraftPayload, LintFinding, TreePayload } from './types.js';

export interface ChatBuilderCallbacks {
  onAddSelected: () => void;
  onReorder: (from: number, to: number) => void;
  onEditText: (index: number, text: string) => void;
  onRemove: (index: number) => void;
  onSetAddressees: (index: number, addressees: string[] | 'everyone') => void;
  onOpenRefine: (index: number) => void;
}

const PROVENANCE_BADGES: Record<string, string> = {
  original: '',
  human_edited: 'edited',
  llm_accepted: 'LLM',
  llm_modified: 'LLM+edit',
};

/** The chat-creation tab: ordered turn list with reorder / edit / addressee
 * controls, plus a live lint badge for the soft rules. */
export function renderChatBuilder(
  container: HTMLElement,
  draft: DraftPayload | null,
  tree: TreePayload | null,
  findings: LintFinding[],
  conflict: boolean,
  callbacks: ChatBuilderCallbacks,
): void {
  container.textContent = '';
  container.classList.add('chat-builder');

  if (conflict) {
    const banner = document.createElement('div');
    banner.className = 'conflict-banner';
    banner.textContent =
      'This draft changed elsewhere; your edit was not applied. The latest version was reloaded.';
    container.appendChild(banner);
  }

  const toolbar = document.createElement('div');
  toolbar.className = 'chat-toolbar';
  const addButton = document.createElement('button');
  addButton.className = 'add-selected';
  addButton.textContent = 'Add selected node';
  addButton.addEventListener('click', callbacks.onAddSelected);
  toolbar.appendChild(addButton);

  const lintBadge = document.createElement('span');
  lintBadge.className = findings.length ? 'lint-badge warn' : 'lint-badge ok';
  lintBadge.textContent = findings.length
    ? `${findings.length} rule warning${findings.length === 1 ? '' : 's'}`
    : 'rules OK';
  lintBadge.title = findings.map((f) => `${f.rule}: ${f.message}`).join('\n');
  toolbar.appendChild(lintBadge);
  container.appendChild(toolbar);

  const lintList = document.createElement('ul');
  lintList.className = 'lint-findings';
  for (const finding of findings) {
    const item = document.createElement('li');
    item.dataset.rule = finding.rule;
    item.textContent = `${finding.rule}: ${finding.message}`;
    lintList.appendChild(item);
  }
  container.appendChild(lintList);

  const list = document.createElement('ol');
  list.className = 'turn-list';
  if (draft === null) {
    const empty = document.createElement('p');
    empty.className = 'chat-empty';
    empty.textContent = 'No draft open yet.';
    container.appendChild(empty);
    return;
  }

  draft.turns.forEach((turn) => {
    const item = document.createElement('li');
    item.className = 'turn';
    item.dataset.index = String(turn.index);
    item.dataset.provenance = turn.provenance;
    item.draggable = true;
    item.addEventListener('dragstart', (event) => {
      event.dataTransfer?.setData('text/plain', String(turn.index));
    });
    item.addEventListener('dragover', (event) => event.preventDefault());
    item.addEventListener('drop', (event) => {
      event.preventDefault();
      const from = Number(event.dataTransfer?.getData('text/plain'));
      if (!Number.isNaN(from) && from !== turn.index) {
        callbacks.onReorder(from, turn.index);
      }
    });

    const header = document.createElement('div');
    header.className = 'turn-header';

    const speaker = document.createElement('span');
    speaker.className = 'turn-speaker';
    speaker.textContent = tree?.users[turn.speaker]?.name ?? turn.speaker;
    header.appendChild(speaker);

    const addressees = document.createElement('span');
    addressees.className = 'turn-addressees';
    addressees.textContent =
      turn.addressees === 'everyone' ? '@everyone' : turn.addressees.map((a) => `@${a}`).join(' ');
    header.appendChild(addressees);

    const badgeText = PROVENANCE_BADGES[turn.provenance];
    if (badgeText) {
      const badge = document.createElement('span');
      badge.className = `provenance-badge provenance-${turn.provenance}`;
      badge.textContent = badgeText;
      header.appendChild(badge);
    }
    item.appendChild(header);

    const text = document.createElement('p');
    text.className = 'turn-text';
    text.textContent = turn.text;
    item.appendChild(text);

    const controls = document.createElement('div');
    controls.className = 'turn-controls';

    const up = document.createElement('button');
    up.className = 'turn-up';
    up.textContent = '↑';
    up.disabled = turn.index === 0;
    up.addEventListener('click', () => callbacks.onReorder(turn.index, turn.index - 1));
    controls.appendChild(up);

    const down = document.createElement('button');
    down.className = 'turn-down';
    down.textContent = '↓';
    down.disabled = turn.index === draft.turns.length - 1;
    down.addEventListener('click', () => callbacks.onReorder(turn.index, turn.index + 1));
    controls.appendChild(down);

    const edit = document.createElement('button');
    edit.className = 'turn-edit';
    edit.textContent = 'Edit';
    edit.addEventListener('click', () => {
      const editor = document.createElement('textarea');
      editor.className = 'turn-editor';
      editor.value = turn.text;
      const save = document.createElement('button');
      save.className = 'turn-save';
      save.textContent = 'Save';
      save.addEventListener('click', () => callbacks.onEditText(turn.index, editor.value));
      item.replaceChild(editor, text);
      controls.replaceChild(save, edit);
    });
    controls.appendChild(edit);

    const addresseesButton = document.createElement('button');
    addresseesButton.className = 'turn-addressees-edit';
    addresseesButton.textContent = '@…';
    addresseesButton.addEventListener('click', () => {
      const picker = renderAddresseePicker(tree, turn.speaker, turn.addressees, (value) =>
        callbacks.onSetAddressees(turn.index, value),
      );
      item.appendChild(picker);
    });
    controls.appendChild(addresseesButton);

    const refine = document.createElement('button');
    refine.className = 'turn-refine';
    refine.textContent = 'Refine';
    refine.addEventListener('click', () => callbacks.onOpenRefine(turn.index));
    controls.appendChild(refine);

    const remove = document.createElement('button');
    remove.className = 'turn-remove';
    remove.textContent = '✕';
    remove.addEventListener('click', () => callbacks.onRemove(turn.index));
    controls.appendChild(remove);

    item.appendChild(controls);
    list.appendChild(item);
  });
  container.appendChild(list);
}

function renderAddresseePicker(
  tree: TreePayload | null,
  speaker: string,
  current: string[] | 'everyone',
  onApply: (value: string[] | 'everyone') => void,
): HTMLElement {
  const picker = document.createElement('div');
  picker.className = 'addressee-picker';

  const everyone = document.createElement('label');
  const everyoneBox = document.createElement('input');
  everyoneBox.type = 'checkbox';
  everyoneBox.className = 'addressee-everyone';
  everyoneBox.checked = current === 'everyone';
  everyone.append(everyoneBox, document.createTextNode('everyone'));
  picker.appendChild(everyone);

  const boxes: HTMLInputElement[] = [];
  for (const userId of Object.keys(tree?.users ?? {}).sort()) {
    if (userId === speaker) continue; // a speaker cannot address itself
    const label = document.createElement('label');
    const box = document.createElement('input');
    box.type = 'checkbox';
    box.value = userId;
    box.checked = current !== 'everyone' && current.includes(userId);
    boxes.push(box);
    label.append(box, document.createTextNode(userId));
    picker.appendChild(label);
  }

  const apply = document.createElement('button');
  apply.className = 'addressee-apply';
  apply.textContent = 'Apply';
  apply.addEventListener('click', () => {
    if (everyoneBox.checked) {
      onApply('everyone');
    } else {
      onApply(boxes.filter((b) => b.checked).map((b) => b.value));
    }
    picker.remove();
  });
  picker.appendChild(apply);
  return picker;
}
