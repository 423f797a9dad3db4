// Plays clips onto drawing surfaces with one shared clock. The
// playedOnce flag is what unlocks choice buttons: a choice may only be
// made after both candidates have been watched in full.

import type { Clip } from "./clip.js";
import type { DrawCtx, View } from "./draw.js";
import { drawFrame } from "./draw.js";

export interface Surface {
  ctx: DrawCtx;
  width: number;
  height: number;
  view: View;
}

export type Scheduler = (cb: () => void) => void;

const defaultScheduler: Scheduler =
  typeof requestAnimationFrame === "function"
    ? (cb) => requestAnimationFrame(() => cb())
    : (cb) => setTimeout(cb, 16);

export interface PlayerOptions {
  rate?: number; // playback speed multiplier
  schedule?: Scheduler;
  now?: () => number; // ms clock, injectable for tests
}

export class ClipPlayer {
  playedOnce = false;
  playing = false;
  private clip: Clip | null = null;
  private rate: number;
  private schedule: Scheduler;
  private now: () => number;
  private generation = 0;

  constructor(
    private surfaces: Surface[],
    options: PlayerOptions = {},
  ) {
    this.rate = options.rate ?? 1;
    this.schedule = options.schedule ?? defaultScheduler;
    this.now = options.now ?? (() => Date.now());
  }

  load(clip: Clip) {
    this.clip = clip;
    this.playedOnce = false;
    this.renderAt(0);
  }

  private renderAt(t: number) {
    const clip = this.clip;
    if (!clip) return;
    for (const s of this.surfaces) {
      drawFrame(s.ctx, s.width, s.height, clip, s.view, t);
    }
  }

  /** Play the loaded clip through; resolves when it finishes. */
  play(): Promise<void> {
    const clip = this.clip;
    if (!clip) return Promise.reject(new Error("no clip loaded"));
    const generation = ++this.generation;
    const startedAt = this.now();
    this.playing = true;
    return new Promise((resolve) => {
      const tick = () => {
        if (generation !== this.generation) return; // superseded
        const t = ((this.now() - startedAt) / 1000) * this.rate;
        if (t >= clip.duration) {
          this.renderAt(clip.duration);
          this.playing = false;
          this.playedOnce = true;
          resolve();
          return;
        }
        this.renderAt(t);
        this.schedule(tick);
      };
      this.schedule(tick);
    });
  }
}

/** Play two candidates together; resolves when both have finished. */
export function playPair(a: ClipPlayer, b: ClipPlayer): Promise<void> {
  return Promise.all([a.play(), b.play()]).then(() => undefined);
}
