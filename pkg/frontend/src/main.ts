import { ApiClient } from './api.js';
import { App } from './app.js';
import { API_BASE_URL } from './config.js';

const root = document.getElementById('app');
if (root === null) {
  throw new Error('missing #app element');
}
const app = new App(root, new ApiClient(API_BASE_URL));
app.startPolling();

// Deep links: #tree=<id>&draft=<id>
const params = new URLSearchParams(window.location.hash.replace(/^#/, ''));
const treeId = params.get('tree');
const draftId = params.get('draft');
if (treeId) {
  void app.loadTree(treeId).then(() => {
    if (draftId) {
      void app.openDraft(draftId);
    }
  });
}

declare global {
  interface Window {
    llmberjack: App;
  }
}
window.llmberjack = app;
