import type { TreePayload } from './types.js';

export interface ProfilesCallbacks {
  onRefineProfile: (speakerId: string) => void;
}

/** Speaker profiles with stance badges and a per-speaker refine action. */
export function renderProfiles(
  container: HTMLElement,
  tree: TreePayload | null,
  colors: Map<string, string>,
  callbacks: ProfilesCallbacks,
): void {
  container.textContent = '';
  container.classList.add('profiles-panel');
  if (tree === null) {
    return;
  }
  for (const speakerId of Object.keys(tree.users).sort()) {
    const profile = tree.users[speakerId];
    const card = document.createElement('div');
    card.className = 'profile-card';
    card.dataset.speaker = speakerId;
    card.style.borderColor = colors.get(speakerId) ?? '#999999';

    const name = document.createElement('h4');
    name.textContent = profile.name;
    card.appendChild(name);

    if (profile.stance && profile.stance !== 'none') {
      const stance = document.createElement('span');
      stance.className = `stance-badge stance-${profile.stance}`;
      stance.textContent = profile.stance;
      card.appendChild(stance);
    }

    const description = document.createElement('p');
    description.className = 'profile-description';
    description.textContent = profile.description;
    card.appendChild(description);

    const refine = document.createElement('button');
    refine.className = 'profile-refine';
    refine.textContent = 'Refine with model';
    refine.addEventListener('click', () => callbacks.onRefineProfile(speakerId));
    card.appendChild(refine);

    container.appendChild(card);
  }
}
