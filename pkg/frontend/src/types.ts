// Wire types mirroring the session service's JSON documents.

export interface NormRect {
  cx: number;
  cy: number;
  w: number;
  h: number;
}

export interface FeedDoc {
  feed_id: string;
  rect: NormRect;
  z_rank: number;
  preservation: number;
  live: boolean;
}

export interface ForegroundDoc {
  object_id: string;
  class_label: string;
  mask: string;
  bbox: NormRect;
  anchor: [number, number];
  occupied_by: string | null;
}

export interface CanvasDoc {
  width_px: number;
  height_px: number;
  gen_width_px: number;
  gen_height_px: number;
}

export interface SceneDoc {
  schema: string;
  canvas: CanvasDoc;
  mode: string;
  activity_prompt: string;
  theme_prompt: string;
  prompt_strength: number;
  seed: number | string;
  feeds: FeedDoc[];
  environment: string | null;
  foreground: ForegroundDoc[];
}

export interface HistoryEntryDoc {
  index: number;
  timestamp: number;
  scene: SceneDoc;
  scene_digest: string;
  label: string;
  issuer: string | null;
  loaded_from: number | null;
  result_digest: string | null;
}

export type Tool = 'transform' | 'select' | 'pan';

export type JobIndicator =
  | { state: 'idle' }
  | { state: 'running'; jobId: string }
  | { state: 'failed'; detail: string };

export type Point = [number, number]; // normalized canvas coordinates

export interface RevisionEvent {
  type: 'revision';
  revision: number;
  changed_fields: string[];
  active_job: { job_id: string; status: string; mode: string } | null;
}

export interface FrameEvent {
  type: 'frame';
  feed_id: string;
  digest: string;
}

export interface JobEvent {
  type: 'job';
  job: { job_id: string; status: string; mode: string };
}

export type ServerEvent =
  | RevisionEvent
  | FrameEvent
  | JobEvent
  | { type: 'hello'; session_id: string; revision: number };

export interface PixelRect {
  x: number;
  y: number;
  w: number;
  h: number;
}

const halfUp = (x: number): number => Math.floor(x + 0.5);

/** NormRect -> integer pixel rect, matching the engine's rounding. */
export function toPixels(rect: NormRect, width: number, height: number): PixelRect {
  const x = halfUp((rect.cx - rect.w / 2) * width);
  const y = halfUp((rect.cy - rect.h / 2) * height);
  let w = halfUp(rect.w * width);
  let h = halfUp(rect.h * height);
  if (rect.w > 0) w = Math.max(w, 1);
  if (rect.h > 0) h = Math.max(h, 1);
  return { x, y, w, h };
}

export interface BBox {
  x0: number;
  y0: number;
  x1: number;
  y1: number;
}

export function outlineBBox(points: Point[]): BBox {
  const xs = points.map((p) => p[0]);
  const ys = points.map((p) => p[1]);
  return {
    x0: Math.min(...xs),
    y0: Math.min(...ys),
    x1: Math.max(...xs),
    y1: Math.max(...ys),
  };
}

export function bboxAreaFraction(box: BBox): number {
  return Math.max(0, box.x1 - box.x0) * Math.max(0, box.y1 - box.y0);
}
