// View state: everything the console knows, none of it authoritative.
// The server's scene documents are the single source of truth; reloading
// the page and replaying GET /scene must reproduce an identical view.

import type { JobIndicator, Point, SceneDoc, Tool } from './types.js';

export interface ViewState {
  sessionId: string;
  revision: number;
  scene: SceneDoc | null;
  selectedFeed: string | null;
  tool: Tool;
  pendingOutline: Point[];
  job: JobIndicator;
}

export type Listener = (state: ViewState) => void;

export class ViewStore {
  state: ViewState;
  private listeners: Listener[] = [];

  constructor(sessionId: string) {
    this.state = {
      sessionId,
      revision: -1,
      scene: null,
      selectedFeed: null,
      tool: 'transform',
      pendingOutline: [],
      job: { state: 'idle' },
    };
  }

  subscribe(listener: Listener): void {
    this.listeners.push(listener);
  }

  private emit(): void {
    for (const listener of this.listeners) listener(this.state);
  }

  /**
   * Install an authoritative snapshot. Revisions never decrease: a stale
   * snapshot (e.g. a late fetch racing a newer broadcast) is discarded.
   * Returns whether the snapshot was applied.
   */
  applySnapshot(revision: number, scene: SceneDoc): boolean {
    if (revision < this.state.revision) return false;
    this.state = { ...this.state, revision, scene };
    if (
      this.state.selectedFeed !== null &&
      !scene.feeds.some((f) => f.feed_id === this.state.selectedFeed)
    ) {
      this.state = { ...this.state, selectedFeed: null };
    }
    this.emit();
    return true;
  }

  /** Optimistic local echo; the next authoritative snapshot reconciles. */
  echoScene(scene: SceneDoc): void {
    this.state = { ...this.state, scene };
    this.emit();
  }

  setTool(tool: Tool): void {
    // switching tools always abandons an in-progress outline
    this.state = { ...this.state, tool, pendingOutline: [] };
    this.emit();
  }

  selectFeed(feedId: string | null): void {
    this.state = { ...this.state, selectedFeed: feedId };
    this.emit();
  }

  setOutline(points: Point[]): void {
    this.state = { ...this.state, pendingOutline: points };
    this.emit();
  }

  setJob(job: JobIndicator): void {
    this.state = { ...this.state, job };
    this.emit();
  }
}
