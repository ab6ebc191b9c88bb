import type { ApiClient, CommandBody, CommandResult } from '../src/api.js';
import type { HistoryEntryDoc, SceneDoc } from '../src/types.js';

export function sceneDoc(overrides: Partial<SceneDoc> = {}): SceneDoc {
  return {
    schema: 'scenemeld/scene@1',
    canvas: { width_px: 1280, height_px: 720, gen_width_px: 1024, gen_height_px: 576 },
    mode: 'webcam_inpaint',
    activity_prompt: '',
    theme_prompt: '',
    prompt_strength: 0.5,
    seed: 'random',
    feeds: [
      {
        feed_id: 'feed-1',
        rect: { cx: 0.3, cy: 0.5, w: 0.3, h: 0.3 },
        z_rank: 0,
        preservation: 0.5,
        live: true,
      },
      {
        feed_id: 'feed-2',
        rect: { cx: 0.7, cy: 0.5, w: 0.3, h: 0.3 },
        z_rank: 1,
        preservation: 0.5,
        live: true,
      },
    ],
    environment: null,
    foreground: [],
    ...overrides,
  };
}

export class FakeClient {
  commands: CommandBody[] = [];
  rejectNext = false;
  revision = 1;
  scene: SceneDoc = sceneDoc();
  entries: HistoryEntryDoc[] = [];

  async command(_sessionId: string, body: CommandBody): Promise<CommandResult> {
    if (this.rejectNext) {
      this.rejectNext = false;
      throw new Error('rejected');
    }
    this.commands.push(body);
    this.revision += 1;
    return { revision: this.revision };
  }

  async sceneSnapshot(_sessionId: string) {
    return { revision: this.revision, scene: this.scene };
  }

  async history(_sessionId: string) {
    return this.entries;
  }

  ofType(type: string): CommandBody[] {
    return this.commands.filter((c) => c.type === type);
  }

  asClient(): ApiClient {
    return this as unknown as ApiClient;
  }
}
