// Layered canvas painting, mirroring the engine's live-render pass:
// environment, then person layers ascending z_rank, then foreground object
// cutouts, then UI chrome (selection handles, pending outline, spinner).

import type { ViewState } from './state.js';
import { toPixels } from './types.js';

export type ImageLookup = (url: string) => CanvasImageSource | null;

export const HANDLE_SIZE = 8;

export interface RendererDeps {
  getImage: ImageLookup;
  environmentUrl: (ref: string) => string;
  personUrl: (feedId: string) => string;
  cutoutUrl: (objectId: string) => string;
}

/** The 8 resize handles at the corners and edge midpoints of a pixel rect. */
export function handlePositions(rect: { x: number; y: number; w: number; h: number }) {
  const { x, y, w, h } = rect;
  const xs = [x, x + w / 2, x + w];
  const ys = [y, y + h / 2, y + h];
  const out: Array<{ hx: number; hy: number; id: string }> = [];
  const names = [
    ['nw', 'n', 'ne'],
    ['w', '', 'e'],
    ['sw', 's', 'se'],
  ];
  for (let row = 0; row < 3; row += 1) {
    for (let col = 0; col < 3; col += 1) {
      if (row === 1 && col === 1) continue;
      out.push({ hx: xs[col], hy: ys[row], id: names[row][col] });
    }
  }
  return out;
}

export function renderScene(
  ctx: CanvasRenderingContext2D,
  view: ViewState,
  deps: RendererDeps,
): void {
  const scene = view.scene;
  if (!scene) return;
  const { width_px: width, height_px: height } = scene.canvas;

  ctx.save();
  ctx.fillStyle = '#808080';
  ctx.fillRect(0, 0, width, height);

  if (scene.environment) {
    const env = deps.getImage(deps.environmentUrl(scene.environment));
    if (env) ctx.drawImage(env, 0, 0, width, height);
  }

  const ordered = [...scene.feeds].sort((a, b) => a.z_rank - b.z_rank);
  for (const feed of ordered) {
    const img = deps.getImage(deps.personUrl(feed.feed_id));
    if (!img) continue;
    const px = toPixels(feed.rect, width, height);
    ctx.drawImage(img, px.x, px.y, px.w, px.h);
  }

  for (const obj of scene.foreground) {
    const img = deps.getImage(deps.cutoutUrl(obj.object_id));
    if (img) ctx.drawImage(img, 0, 0, width, height);
  }

  if (view.selectedFeed) {
    const feed = scene.feeds.find((f) => f.feed_id === view.selectedFeed);
    if (feed) {
      const px = toPixels(feed.rect, width, height);
      ctx.strokeStyle = '#4c9ffe';
      ctx.lineWidth = 2;
      ctx.strokeRect(px.x, px.y, px.w, px.h);
      ctx.fillStyle = '#4c9ffe';
      for (const handle of handlePositions(px)) {
        ctx.fillRect(
          handle.hx - HANDLE_SIZE / 2,
          handle.hy - HANDLE_SIZE / 2,
          HANDLE_SIZE,
          HANDLE_SIZE,
        );
      }
    }
  }

  if (view.pendingOutline.length > 1) {
    ctx.strokeStyle = '#ffd24c';
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    const [firstX, firstY] = view.pendingOutline[0];
    ctx.moveTo(firstX * width, firstY * height);
    for (const [px, py] of view.pendingOutline.slice(1)) {
      ctx.lineTo(px * width, py * height);
    }
    ctx.stroke();
  }

  if (view.job.state === 'running') {
    // keep the last stable render visible under a translucent veil
    ctx.fillStyle = 'rgba(20, 20, 20, 0.35)';
    ctx.fillRect(0, 0, width, height);
    ctx.strokeStyle = '#ffffff';
    ctx.lineWidth = 4;
    ctx.beginPath();
    const angle = (Date.now() / 240) % (Math.PI * 2);
    ctx.arc(width / 2, height / 2, 18, angle, angle + Math.PI * 1.4);
    ctx.stroke();
  }

  ctx.restore();
}
