// Console bootstrap: join (or create) a session, hydrate the view from
// server state, keep it reconciled via the WebSocket stream, and route
// pointer input to the active tool.

import { ApiClient } from './api.js';
import { bindControls, renderFeedStrip, renderHistoryList } from './controls.js';
import { renderScene } from './renderer.js';
import { ViewStore } from './state.js';
import { PanTool, SelectTool, TransformTool } from './tools.js';
import type { Point, ServerEvent } from './types.js';

interface ImageCacheEntry {
  image: HTMLImageElement;
  ready: boolean;
}

class ImageCache {
  private entries = new Map<string, ImageCacheEntry>();

  constructor(private onReady: () => void) {}

  get(url: string): CanvasImageSource | null {
    let entry = this.entries.get(url);
    if (!entry) {
      const image = new Image();
      entry = { image, ready: false };
      image.onload = () => {
        entry!.ready = true;
        this.onReady();
      };
      image.src = url;
      this.entries.set(url, entry);
    }
    return entry.ready ? entry.image : null;
  }

  invalidate(prefix: string): void {
    for (const key of [...this.entries.keys()]) {
      if (key.startsWith(prefix)) this.entries.delete(key);
    }
  }
}

async function hydrate(client: ApiClient, store: ViewStore, doc: Document): Promise<void> {
  const snapshot = await client.sceneSnapshot(store.state.sessionId);
  store.applySnapshot(snapshot.revision, snapshot.scene);
  renderFeedStrip(doc, snapshot.scene);
  const entries = await client.history(store.state.sessionId);
  renderHistoryList(doc, entries);
}

export async function boot(doc: Document): Promise<void> {
  const params = new URLSearchParams(doc.defaultView?.location.search ?? '');
  const base = params.get('server') ?? '';
  const client = new ApiClient(base);

  let sessionId = params.get('session');
  if (!sessionId) {
    sessionId = await client.createSession({});
  }
  const store = new ViewStore(sessionId);
  const name = params.get('name');
  if (name) await client.join(sessionId, name);

  const canvas = doc.getElementById('composition') as HTMLCanvasElement;
  const ctx = canvas.getContext('2d')!;
  const frameVersions = new Map<string, string>();

  const cache = new ImageCache(() => paint());

  const paint = () => {
    const scene = store.state.scene;
    if (!scene) return;
    canvas.width = scene.canvas.width_px;
    canvas.height = scene.canvas.height_px;
    renderScene(ctx, store.state, {
      getImage: (url) => cache.get(url),
      environmentUrl: (ref) => client.rasterUrl(sessionId!, ref),
      personUrl: (feedId) =>
        client.personLayerUrl(sessionId!, feedId, frameVersions.get(feedId) ?? '0'),
      cutoutUrl: (objectId) => client.objectCutoutUrl(sessionId!, objectId),
    });
    const status = doc.getElementById('job-status');
    if (status) {
      status.textContent =
        store.state.job.state === 'running'
          ? 'generating...'
          : store.state.job.state === 'failed'
            ? `failed: ${store.state.job.detail}`
            : 'idle';
    }
  };
  store.subscribe(paint);

  const refetch = () => void hydrate(client, store, doc);
  bindControls({ client, store, document: doc, onError: refetch });

  const transform = new TransformTool({ client, store, onRejected: refetch });
  const select = new SelectTool({
    client,
    store,
    warn: (msg) => {
      const el = doc.getElementById('warning');
      if (el) el.textContent = msg;
    },
    promptForRegion: async () => {
      const view = doc.defaultView;
      if (!view) return null;
      const phrase = view.prompt('Describe what to add (leave empty to remove):') ?? '';
      if (phrase === null) return null;
      return { phrase, kind: phrase ? 'add' : 'remove' };
    },
  });
  const pan = new PanTool();

  const normPoint = (ev: PointerEvent): Point => {
    const box = canvas.getBoundingClientRect();
    return [
      (ev.clientX - box.left) / box.width,
      (ev.clientY - box.top) / box.height,
    ];
  };

  canvas.addEventListener('pointerdown', (ev) => {
    const p = normPoint(ev);
    const tool = store.state.tool;
    if (tool === 'transform') transform.pointerDown(p, ev.shiftKey);
    else if (tool === 'select') select.pointerDown(p);
    else pan.pointerDown(p);
  });
  canvas.addEventListener('pointermove', (ev) => {
    const p = normPoint(ev);
    const tool = store.state.tool;
    if (tool === 'transform') transform.pointerMove(p);
    else if (tool === 'select') select.pointerMove(p);
    else pan.pointerMove(p);
  });
  canvas.addEventListener('pointerup', (ev) => {
    const p = normPoint(ev);
    const tool = store.state.tool;
    if (tool === 'transform') transform.pointerUp(p);
    else if (tool === 'select') void select.pointerUp();
    else pan.pointerUp();
  });
  doc.addEventListener('keydown', (ev) => {
    if (ev.key === 'Escape') select.cancel();
  });

  client.openSocket(
    sessionId,
    (event: ServerEvent) => {
      if (event.type === 'revision') {
        if (event.active_job) {
          store.setJob({ state: 'running', jobId: event.active_job.job_id });
        } else {
          store.setJob({ state: 'idle' });
        }
        void client.sceneSnapshot(sessionId!).then((snap) => {
          if (store.applySnapshot(snap.revision, snap.scene)) {
            renderFeedStrip(doc, snap.scene);
            void client.history(sessionId!).then((h) => renderHistoryList(doc, h));
          }
        });
      } else if (event.type === 'frame') {
        frameVersions.set(event.feed_id, event.digest.slice(0, 8));
        cache.invalidate(client.personLayerUrl(sessionId!, event.feed_id, ''));
        paint();
      } else if (event.type === 'job') {
        if (event.job.status === 'running' || event.job.status === 'queued') {
          store.setJob({ state: 'running', jobId: event.job.job_id });
        } else if (event.job.status === 'failed') {
          store.setJob({ state: 'failed', detail: event.job.job_id });
        } else {
          store.setJob({ state: 'idle' });
        }
      }
    },
    () => {
      // reconnect with a revision resync
      setTimeout(() => void hydrate(client, store, doc), 500);
    },
  );

  await hydrate(client, store, doc);
}

declare global {
  interface Window {
    scenemeldBoot?: typeof boot;
  }
}

if (typeof window !== 'undefined' && typeof document !== 'undefined') {
  window.scenemeldBoot = boot;
  if (document.getElementById('composition')) {
    void boot(document);
  }
}
