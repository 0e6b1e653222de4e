import {
  LENGTH_OPTIONS,
  STYLE_OPTIONS,
  TEMPERAMENT_OPTIONS,
  type Constraints,
  type SuggestionPayload,
} from './types.js';

export interface RefinePanelCallbacks {
  onRequest: (constraints: Constraints) => void;
  onAccept: () => void;
  onModify: (editedText: string) => void;
  onReject: () => void;
}

function picker(name: string, options: readonly string[]): HTMLSelectElement {
  const select = document.createElement('select');
  select.className = `constraint-${name}`;
  select.name = name;
  for (const option of options) {
    const element = document.createElement('option');
    element.value = option;
    element.textContent = option.replace(/_/g, ' ');
    select.appendChild(element);
  }
  return select;
}

/** Suggestion review: constraint pickers (5 options per dimension), original
 * and suggested text side by side, and the accept / modify / reject choice. */
export function renderRefinePanel(
  container: HTMLElement,
  turnIndex: number | null,
  originalText: string | null,
  suggestion: SuggestionPayload | null,
  upstreamError: string | null,
  callbacks: RefinePanelCallbacks,
): void {
  container.textContent = '';
  container.classList.add('refine-panel');

  if (turnIndex === null || originalText === null) {
    const hint = document.createElement('p');
    hint.className = 'refine-empty';
    hint.textContent = 'Pick a turn in the chat tab to refine it.';
    container.appendChild(hint);
    return;
  }

  const heading = document.createElement('h3');
  heading.textContent = `Refine turn ${turnIndex}`;
  container.appendChild(heading);

  const form = document.createElement('div');
  form.className = 'constraint-form';
  const lengthPicker = picker('length', LENGTH_OPTIONS);
  const stylePicker = picker('style', STYLE_OPTIONS);
  const temperamentPicker = picker('temperament', TEMPERAMENT_OPTIONS);
  form.append(lengthPicker, stylePicker, temperamentPicker);

  const request = document.createElement('button');
  request.className = 'refine-request';
  request.textContent = suggestion ? 'Ask again' : 'Ask the model';
  request.addEventListener('click', () =>
    callbacks.onRequest({
      length: lengthPicker.value,
      style: stylePicker.value,
      temperament: temperamentPicker.value,
    }),
  );
  form.appendChild(request);
  container.appendChild(form);

  if (upstreamError !== null) {
    const banner = document.createElement('div');
    banner.className = 'upstream-error';
    banner.textContent = `Model call failed: ${upstreamError}`;
    const retry = document.createElement('button');
    retry.className = 'refine-retry';
    retry.textContent = 'Retry';
    retry.addEventListener('click', () =>
      callbacks.onRequest({
        length: lengthPicker.value,
        style: stylePicker.value,
        temperament: temperamentPicker.value,
      }),
    );
    banner.appendChild(retry);
    container.appendChild(banner);
  }

  const compare = document.createElement('div');
  compare.className = 'compare';
  const originalPane = document.createElement('div');
  originalPane.className = 'compare-original';
  originalPane.textContent = originalText;
  compare.appendChild(originalPane);

  const suggestedPane = document.createElement('div');
  suggestedPane.className = 'compare-suggested';
  suggestedPane.textContent = suggestion ? suggestion.suggested_text : '(no suggestion yet)';
  compare.appendChild(suggestedPane);
  container.appendChild(compare);

  if (suggestion === null) {
    return;
  }

  const decisions = document.createElement('div');
  decisions.className = 'decision-buttons';

  const accept = document.createElement('button');
  accept.className = 'decision-accept';
  accept.textContent = 'Accept';
  accept.addEventListener('click', callbacks.onAccept);
  decisions.appendChild(accept);

  const modify = document.createElement('button');
  modify.className = 'decision-modify';
  modify.textContent = 'Modify';
  modify.addEventListener('click', () => {
    const editor = document.createElement('textarea');
    editor.className = 'modify-editor';
    editor.value = suggestion.suggested_text; // prefilled with the suggestion
    const save = document.createElement('button');
    save.className = 'modify-save';
    save.textContent = 'Apply modified text';
    save.addEventListener('click', () => callbacks.onModify(editor.value));
    decisions.append(editor, save);
  });
  decisions.appendChild(modify);

  const reject = document.createElement('button');
  reject.className = 'decision-reject';
  reject.textContent = 'Reject';
  reject.addEventListener('click', callbacks.onReject);
  decisions.appendChild(reject);

  container.appendChild(decisions);
}
