// Conformance: every console control issues exactly its mapped API
// command. The DOM under test is the real index.html markup.

import { readFileSync } from 'node:fs';
import { dirname, join } from 'node:path';
import { fileURLToPath } from 'node:url';

import { beforeEach, describe, expect, it } from 'vitest';

import { bindControls, renderFeedStrip, renderHistoryList } from '../src/controls.js';
import { ViewStore } from '../src/state.js';
import { FakeClient, sceneDoc } from './helpers.js';

const here = dirname(fileURLToPath(import.meta.url));
const html = readFileSync(join(here, '..', 'index.html'), 'utf-8');
const body = html.slice(html.indexOf('<body>') + 6, html.indexOf('</body>'));

function setup() {
  document.body.innerHTML = body.replace(/<script[\s\S]*?<\/script>/, '');
  const client = new FakeClient();
  const store = new ViewStore('s1');
  store.applySnapshot(1, sceneDoc());
  bindControls({ client: client.asClient(), store, document });
  renderFeedStrip(document, sceneDoc());
  renderHistoryList(document, [
    { index: 0, label: 'create' },
    { index: 1, label: 'generate' },
  ]);
  return { client, store };
}

function fire(el: Element, type: string) {
  el.dispatchEvent(new Event(type, { bubbles: true }));
}

describe('control-to-command conformance', () => {
  let client: FakeClient;
  let store: ViewStore;

  beforeEach(() => {
    ({ client, store } = setup());
  });

  it('mode toggle issues SetMode', () => {
    const toggle = document.getElementById('mode-toggle') as HTMLInputElement;
    toggle.checked = true;
    fire(toggle, 'change');
    expect(client.ofType('SetMode')).toEqual([
      expect.objectContaining({ mode: 'canvas_img2img' }),
    ]);
    expect(client.commands).toHaveLength(1);
  });

  it('stylization-strength slider issues SetPromptStrength', () => {
    const slider = document.getElementById('prompt-strength') as HTMLInputElement;
    slider.value = '0.8';
    fire(slider, 'change');
    expect(client.ofType('SetPromptStrength')).toEqual([
      expect.objectContaining({ value: 0.8 }),
    ]);
    expect(client.commands).toHaveLength(1);
  });

  it('activity and theme fields issue SetPrompts', () => {
    const activity = document.getElementById('activity-prompt') as HTMLInputElement;
    const theme = document.getElementById('theme-prompt') as HTMLInputElement;
    activity.value = 'brainstorming';
    fire(activity, 'change');
    theme.value = 'treehouse';
    fire(theme, 'change');
    expect(client.ofType('SetPrompts')).toHaveLength(2);
    expect(client.commands.at(-1)).toEqual(
      expect.objectContaining({ activity: 'brainstorming', theme: 'treehouse' }),
    );
  });

  it('generate button issues Generate', () => {
    fire(document.getElementById('generate')!, 'click');
    expect(client.ofType('Generate')).toHaveLength(1);
    expect(client.commands).toHaveLength(1);
  });

  it('auto-layout button issues AutoLayout', () => {
    fire(document.getElementById('auto-layout')!, 'click');
    expect(client.ofType('AutoLayout')).toHaveLength(1);
  });

  it('undo button issues Undo', () => {
    fire(document.getElementById('undo')!, 'click');
    expect(client.ofType('Undo')).toHaveLength(1);
  });

  it('prior upload issues UploadPrior with the file payload', async () => {
    const input = document.getElementById('upload-prior') as HTMLInputElement;
    const file = new File([new Uint8Array([137, 80, 78, 71])], 'prior.png', {
      type: 'image/png',
    });
    Object.defineProperty(input, 'files', { value: [file] });
    fire(input, 'change');
    await new Promise((resolve) => setTimeout(resolve, 20));
    const uploads = client.ofType('UploadPrior');
    expect(uploads).toHaveLength(1);
    expect(typeof uploads[0].image).toBe('string');
    expect((uploads[0].image as string).length).toBeGreaterThan(0);
  });

  it('history entries issue LoadHistory with their index', () => {
    const rows = document.querySelectorAll('#history-list [data-history-index]');
    (rows[1] as HTMLElement).dispatchEvent(new MouseEvent('click', { bubbles: true }));
    expect(client.ofType('LoadHistory')).toEqual([expect.objectContaining({ index: 1 })]);
  });

  it('per-user preservation slider issues SetPreservation for that feed', () => {
    const slider = document.querySelector(
      '.feed-preservation[data-feed="feed-2"]',
    ) as HTMLInputElement;
    slider.value = '0.25';
    fire(slider, 'change');
    expect(client.ofType('SetPreservation')).toEqual([
      expect.objectContaining({ feed_id: 'feed-2', value: 0.25 }),
    ]);
  });

  it('per-user live toggle issues FreezeToggle for that feed', () => {
    const toggle = document.querySelector(
      '.feed-live[data-feed="feed-1"]',
    ) as HTMLInputElement;
    toggle.checked = false;
    fire(toggle, 'change');
    expect(client.ofType('FreezeToggle')).toEqual([
      expect.objectContaining({ feed_id: 'feed-1' }),
    ]);
  });

  it('tool buttons switch the active tool without issuing commands', () => {
    fire(document.getElementById('tool-select')!, 'click');
    expect(store.state.tool).toBe('select');
    fire(document.getElementById('tool-pan')!, 'click');
    expect(store.state.tool).toBe('pan');
    expect(client.commands).toHaveLength(0);
  });
});
