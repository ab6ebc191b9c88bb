// Binds the control row to session-service commands. Each control issues
// exactly one command type; the table in the README enumerates the mapping.

import type { ApiClient } from './api.js';
import type { ViewStore } from './state.js';
import type { SceneDoc, Tool } from './types.js';

export interface ControlDeps {
  client: ApiClient;
  store: ViewStore;
  document: Document;
  onError?: (message: string) => void;
}

function send(deps: ControlDeps, body: Record<string, unknown>): Promise<unknown> {
  return deps.client
    .command(deps.store.state.sessionId, { type: String(body.type), ...body })
    .catch((err) => deps.onError?.(String(err)));
}

export function readFileAsBase64(file: Blob): Promise<string> {
  return new Promise((resolve, reject) => {
    const reader = new FileReader();
    reader.onload = () => {
      const url = String(reader.result);
      resolve(url.slice(url.indexOf(',') + 1));
    };
    reader.onerror = () => reject(reader.error);
    reader.readAsDataURL(file);
  });
}

export function bindControls(deps: ControlDeps): void {
  const { document: doc, store } = deps;
  const byId = (id: string) => doc.getElementById(id);

  byId('mode-toggle')?.addEventListener('change', (ev) => {
    const checked = (ev.target as HTMLInputElement).checked;
    void send(deps, { type: 'SetMode', mode: checked ? 'canvas_img2img' : 'webcam_inpaint' });
  });

  byId('prompt-strength')?.addEventListener('change', (ev) => {
    void send(deps, {
      type: 'SetPromptStrength',
      value: Number((ev.target as HTMLInputElement).value),
    });
  });

  const sendPrompts = () => {
    const activity = (byId('activity-prompt') as HTMLInputElement | null)?.value ?? '';
    const theme = (byId('theme-prompt') as HTMLInputElement | null)?.value ?? '';
    void send(deps, { type: 'SetPrompts', activity, theme });
  };
  byId('activity-prompt')?.addEventListener('change', sendPrompts);
  byId('theme-prompt')?.addEventListener('change', sendPrompts);

  byId('generate')?.addEventListener('click', () => {
    void send(deps, { type: 'Generate' });
  });

  byId('auto-layout')?.addEventListener('click', () => {
    void send(deps, { type: 'AutoLayout' });
  });

  byId('undo')?.addEventListener('click', () => {
    void send(deps, { type: 'Undo' });
  });

  byId('upload-prior')?.addEventListener('change', (ev) => {
    const input = ev.target as HTMLInputElement;
    const file = input.files?.[0];
    if (!file) return;
    void readFileAsBase64(file).then((image) =>
      send(deps, { type: 'UploadPrior', image }),
    );
  });

  byId('history-list')?.addEventListener('click', (ev) => {
    const target = (ev.target as HTMLElement).closest('[data-history-index]');
    if (!target) return;
    const index = Number(target.getAttribute('data-history-index'));
    void send(deps, { type: 'LoadHistory', index });
  });

  // per-user controls are delegated from the feed strip
  byId('feed-strip')?.addEventListener('change', (ev) => {
    const target = ev.target as HTMLInputElement;
    const feedId = target.getAttribute('data-feed');
    if (!feedId) return;
    if (target.classList.contains('feed-preservation')) {
      void send(deps, {
        type: 'SetPreservation',
        feed_id: feedId,
        value: Number(target.value),
      });
    } else if (target.classList.contains('feed-live')) {
      void send(deps, { type: 'FreezeToggle', feed_id: feedId });
    }
  });

  for (const tool of ['transform', 'select', 'pan'] as Tool[]) {
    byId(`tool-${tool}`)?.addEventListener('click', () => store.setTool(tool));
  }
}

/** Rebuild the per-feed control strip from an authoritative scene. */
export function renderFeedStrip(doc: Document, scene: SceneDoc): void {
  const strip = doc.getElementById('feed-strip');
  if (!strip) return;
  strip.innerHTML = '';
  for (const feed of scene.feeds) {
    const cell = doc.createElement('div');
    cell.className = 'feed-cell';
    cell.innerHTML = [
      `<span class="feed-name">${feed.feed_id}</span>`,
      `<input type="range" min="0" max="1" step="0.05" value="${feed.preservation}"`,
      ` class="feed-preservation" data-feed="${feed.feed_id}"`,
      ` title="background preservation" />`,
      `<input type="checkbox" class="feed-live" data-feed="${feed.feed_id}"`,
      ` ${feed.live ? 'checked' : ''} title="live video / static frame" />`,
    ].join('');
    strip.appendChild(cell);
  }
}

/** Rebuild the history browser list. */
export function renderHistoryList(
  doc: Document,
  entries: Array<{ index: number; label: string }>,
): void {
  const list = doc.getElementById('history-list');
  if (!list) return;
  list.innerHTML = '';
  for (const entry of entries) {
    const item = doc.createElement('li');
    item.setAttribute('data-history-index', String(entry.index));
    item.textContent = `#${entry.index} ${entry.label}`;
    list.appendChild(item);
  }
}
