// HTTP + WebSocket client for the session service. The console talks only
// to this API; it never reaches generation or LLM backends directly.

import type { HistoryEntryDoc, SceneDoc, ServerEvent } from './types.js';

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export interface CommandBody {
  type: string;
  [key: string]: unknown;
}

export interface CommandResult {
  revision?: number;
  job_id?: string;
  job_status?: string;
  [key: string]: unknown;
}

export class CommandRejectedError extends Error {
  constructor(
    public status: number,
    public detail: string,
  ) {
    super(`command rejected (${status}): ${detail}`);
  }
}

let commandCounter = 0;

export class ApiClient {
  constructor(
    private base: string,
    private fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private api(path: string): string {
    return `${this.base}/api/v1${path}`;
  }

  private async postJson(path: string, body: unknown): Promise<Record<string, unknown>> {
    const resp = await this.fetchFn(this.api(path), {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(body),
    });
    if (!resp.ok) {
      const text = await resp.text();
      throw new CommandRejectedError(resp.status, text);
    }
    return (await resp.json()) as Record<string, unknown>;
  }

  async createSession(overrides: Record<string, unknown> = {}): Promise<string> {
    const doc = await this.postJson('/sessions', overrides);
    return doc.session_id as string;
  }

  async join(sessionId: string, displayName: string): Promise<string> {
    const doc = await this.postJson(`/sessions/${sessionId}/join`, {
      display_name: displayName,
    });
    return doc.feed_id as string;
  }

  /** Commands are acknowledged by response; ids correlate logs client-side. */
  async command(sessionId: string, body: CommandBody): Promise<CommandResult> {
    commandCounter += 1;
    return (await this.postJson(`/sessions/${sessionId}/command`, {
      ...body,
      client_cmd_id: `cmd-${commandCounter}`,
    })) as CommandResult;
  }

  async sceneSnapshot(sessionId: string): Promise<{ revision: number; scene: SceneDoc }> {
    const resp = await this.fetchFn(this.api(`/sessions/${sessionId}/scene`));
    if (!resp.ok) throw new Error(`scene fetch failed: ${resp.status}`);
    return (await resp.json()) as { revision: number; scene: SceneDoc };
  }

  async history(sessionId: string): Promise<HistoryEntryDoc[]> {
    const resp = await this.fetchFn(this.api(`/sessions/${sessionId}/history`));
    if (!resp.ok) throw new Error(`history fetch failed: ${resp.status}`);
    const doc = (await resp.json()) as { entries: HistoryEntryDoc[] };
    return doc.entries;
  }

  async ingestFrame(sessionId: string, feedId: string, data: Blob): Promise<void> {
    const resp = await this.fetchFn(this.api(`/sessions/${sessionId}/feeds/${feedId}/frames`), {
      method: 'POST',
      headers: { 'content-type': 'image/png' },
      body: data,
    });
    if (!resp.ok) throw new CommandRejectedError(resp.status, await resp.text());
  }

  rasterUrl(sessionId: string, ref: string): string {
    return this.api(`/sessions/${sessionId}/rasters/${ref.replace('sha256:', '')}`);
  }

  personLayerUrl(sessionId: string, feedId: string, cacheKey: string): string {
    return this.api(`/sessions/${sessionId}/feeds/${feedId}/frame?v=${cacheKey}`);
  }

  objectCutoutUrl(sessionId: string, objectId: string): string {
    return this.api(`/sessions/${sessionId}/objects/${objectId}`);
  }

  socketUrl(sessionId: string): string {
    const ws = this.base.replace(/^http/, 'ws');
    return `${ws}/api/v1/sessions/${sessionId}/ws`;
  }

  openSocket(
    sessionId: string,
    onEvent: (event: ServerEvent) => void,
    onClose: () => void,
    ctor: typeof WebSocket = WebSocket,
  ): WebSocket {
    const socket = new ctor(this.socketUrl(sessionId));
    socket.onmessage = (msg) => onEvent(JSON.parse(String(msg.data)) as ServerEvent);
    socket.onclose = onClose;
    return socket;
  }
}
