// Pointer tools over the composition canvas. All coordinates entering the
// tools are normalized (0..1 on the scene canvas); the canvas element's
// pixel mapping is the caller's concern.

import type { ApiClient, CommandResult } from './api.js';
import type { ViewStore } from './state.js';
import type { FeedDoc, Point } from './types.js';
import { bboxAreaFraction, outlineBBox } from './types.js';

export const MOVE_COMMANDS_PER_SECOND = 10;
export const MIN_REGION_AREA = 0.01;
const MOVE_INTERVAL_MS = 1000 / MOVE_COMMANDS_PER_SECOND;

export interface ToolDeps {
  client: ApiClient;
  store: ViewStore;
  now?: () => number;
  warn?: (message: string) => void;
  /** Collects phrase and add/remove for a completed outline. */
  promptForRegion?: () => Promise<{ phrase: string; kind: 'add' | 'remove' } | null>;
  onRejected?: () => void;
}

function hitFeed(feeds: FeedDoc[], point: Point): FeedDoc | null {
  const [x, y] = point;
  const candidates = feeds.filter(
    (f) =>
      Math.abs(x - f.rect.cx) * 2 <= f.rect.w && Math.abs(y - f.rect.cy) * 2 <= f.rect.h,
  );
  if (!candidates.length) return null;
  return candidates.reduce((top, f) => (f.z_rank > top.z_rank ? f : top));
}

export class TransformTool {
  private dragging: {
    feedId: string;
    grabOffset: Point;
    startRect: { cx: number; cy: number; w: number; h: number };
    scaling: boolean;
    scaleStart: Point;
    lastSent: number;
    moved: boolean;
  } | null = null;

  constructor(private deps: ToolDeps) {}

  private get now(): number {
    return (this.deps.now ?? (() => Date.now()))();
  }

  pointerDown(point: Point, onHandle = false): void {
    const scene = this.deps.store.state.scene;
    if (!scene) return;
    const selected = this.deps.store.state.selectedFeed;
    if (onHandle && selected) {
      const feed = scene.feeds.find((f) => f.feed_id === selected);
      if (!feed) return;
      this.dragging = {
        feedId: selected,
        grabOffset: [0, 0],
        startRect: { ...feed.rect },
        scaling: true,
        scaleStart: point,
        lastSent: 0,
        moved: false,
      };
      return;
    }
    const feed = hitFeed(scene.feeds, point);
    this.deps.store.selectFeed(feed ? feed.feed_id : null);
    if (feed) {
      this.dragging = {
        feedId: feed.feed_id,
        grabOffset: [point[0] - feed.rect.cx, point[1] - feed.rect.cy],
        startRect: { ...feed.rect },
        scaling: false,
        scaleStart: point,
        lastSent: 0,
        moved: false,
      };
    }
  }

  private currentFactor(d: NonNullable<typeof this.dragging>, point: Point): number {
    const start = Math.hypot(
      d.scaleStart[0] - d.startRect.cx,
      d.scaleStart[1] - d.startRect.cy,
    );
    const nowDist = Math.hypot(point[0] - d.startRect.cx, point[1] - d.startRect.cy);
    if (start <= 1e-6) return 1;
    return Math.max(nowDist / start, 0.01);
  }

  pointerMove(point: Point): void {
    const d = this.dragging;
    const scene = this.deps.store.state.scene;
    if (!d || !scene) return;
    d.moved = true;

    if (d.scaling) {
      const factor = this.currentFactor(d, point);
      this.echoRect(d.feedId, {
        cx: d.startRect.cx,
        cy: d.startRect.cy,
        w: d.startRect.w * factor,
        h: d.startRect.h * factor,
      });
      return; // scale is committed once, on release
    }

    const cx = point[0] - d.grabOffset[0];
    const cy = point[1] - d.grabOffset[1];
    this.echoRect(d.feedId, { ...d.startRect, cx, cy });
    // coalesce Move traffic while dragging
    if (this.now - d.lastSent >= MOVE_INTERVAL_MS) {
      d.lastSent = this.now;
      void this.send({ type: 'Move', feed_id: d.feedId, cx, cy });
    }
  }

  pointerUp(point: Point): void {
    const d = this.dragging;
    this.dragging = null;
    if (!d || !d.moved) return; // release without movement: no command
    if (d.scaling) {
      const factor = this.currentFactor(d, point);
      void this.send({ type: 'Scale', feed_id: d.feedId, factor });
      return;
    }
    // final exact position on release
    const cx = point[0] - d.grabOffset[0];
    const cy = point[1] - d.grabOffset[1];
    void this.send({ type: 'Move', feed_id: d.feedId, cx, cy });
  }

  private echoRect(
    feedId: string,
    rect: { cx: number; cy: number; w: number; h: number },
  ): void {
    const scene = this.deps.store.state.scene;
    if (!scene) return;
    this.deps.store.echoScene({
      ...scene,
      feeds: scene.feeds.map((f) => (f.feed_id === feedId ? { ...f, rect } : f)),
    });
  }

  private async send(body: Record<string, unknown>): Promise<CommandResult | null> {
    try {
      return await this.deps.client.command(this.deps.store.state.sessionId, {
        type: String(body.type),
        ...body,
      });
    } catch {
      this.deps.onRejected?.(); // revert to broadcast state
      return null;
    }
  }
}

export class SelectTool {
  private active = false;

  constructor(private deps: ToolDeps) {}

  pointerDown(point: Point): void {
    this.active = true;
    this.deps.store.setOutline([point]);
  }

  pointerMove(point: Point): void {
    if (!this.active) return;
    this.deps.store.setOutline([...this.deps.store.state.pendingOutline, point]);
  }

  cancel(): void {
    // Escape mid-draw discards the outline
    this.active = false;
    this.deps.store.setOutline([]);
  }

  async pointerUp(): Promise<void> {
    if (!this.active) return;
    this.active = false;
    const outline = this.deps.store.state.pendingOutline;
    this.deps.store.setOutline([]);
    if (outline.length < 3 || bboxAreaFraction(outlineBBox(outline)) < MIN_REGION_AREA) {
      this.deps.warn?.('selection too small: outline at least 1% of the canvas');
      return;
    }
    const answer = await (this.deps.promptForRegion?.() ?? Promise.resolve(null));
    if (!answer) return;
    try {
      await this.deps.client.command(this.deps.store.state.sessionId, {
        type: 'RegionEdit',
        outline,
        phrase: answer.phrase,
        kind: answer.kind,
      });
    } catch (err) {
      this.deps.warn?.(String(err));
    }
  }
}

export class PanTool {
  offset: Point = [0, 0];
  private last: Point | null = null;

  pointerDown(point: Point): void {
    this.last = point;
  }

  pointerMove(point: Point): void {
    if (!this.last) return;
    this.offset = [
      this.offset[0] + point[0] - this.last[0],
      this.offset[1] + point[1] - this.last[1],
    ];
    this.last = point;
  }

  pointerUp(): void {
    this.last = null;
  }
}
