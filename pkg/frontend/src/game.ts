/**
 * Fixed-timestep trial loop. Wall-clock time is accumulated and consumed in
 * exact 1/tick_rate steps so the logged frames are pure functions of the key
 * trace; frame batches are flushed to the server off the tick path about
 * every two seconds. Tab blur is recorded as a protocol event.
 */

import { ApiClient } from "./api.js";
import {
  Kinematics,
  KEY_DOWN,
  KEY_LEFT,
  KEY_RIGHT,
  KEY_UP,
  World,
  fieldCenter,
  step,
} from "./kinematics.js";

const ARROWS: Record<string, number> = {
  ArrowUp: KEY_UP,
  ArrowDown: KEY_DOWN,
  ArrowLeft: KEY_LEFT,
  ArrowRight: KEY_RIGHT,
};

const FLUSH_INTERVAL_TICKS = 60; // ~2 s between frame uploads

export interface TrialHooks {
  onFrame(state: Kinematics, tick: number, remaining: number, warning: boolean): void;
  onAsFrame(x: number, y: number): void;
  onDone(): void;
}

export class TrialRunner {
  private mask = 0;
  private state: Kinematics;
  private tick = 0;
  private readonly totalTicks: number;
  private accumulator = 0;
  private lastTime: number | null = null;
  private keysLog: number[] = [];
  private pos: [number, number][];
  private vel: [number, number][];
  private events: { type: string; t: number }[] = [];
  private flushedThrough = 0;
  private uploads: Promise<unknown> = Promise.resolve();
  private running = false;

  constructor(
    private world: World,
    private session: string,
    private trialIndex: number,
    private asPath: [number, number][] | null,
    private api: ApiClient,
    private hooks: TrialHooks
  ) {
    const start = fieldCenter(world);
    this.state = { x: start.x, y: start.y, vx: 0.0, vy: 0.0 };
    this.totalTicks = Math.round(world.trial_duration * world.tick_rate);
    this.pos = [[this.state.x, this.state.y]];
    this.vel = [[0.0, 0.0]];
  }

  readonly keydown = (ev: KeyboardEvent): void => {
    const bit = ARROWS[ev.key];
    if (bit !== undefined) {
      this.mask |= bit;
      ev.preventDefault();
    }
  };

  readonly keyup = (ev: KeyboardEvent): void => {
    const bit = ARROWS[ev.key];
    if (bit !== undefined) {
      this.mask &= ~bit;
      ev.preventDefault();
    }
  };

  readonly blurred = (): void => {
    this.mask = 0; // keyup events are lost while unfocused
    this.events.push({ type: "blur", t: this.tick / this.world.tick_rate });
  };

  start(): void {
    this.running = true;
    this.lastTime = null;
    requestAnimationFrame(this.loop);
  }

  private readonly loop = (nowMs: number): void => {
    if (!this.running) {
      return;
    }
    if (this.lastTime === null) {
      this.lastTime = nowMs;
    }
    this.accumulator += Math.min((nowMs - this.lastTime) / 1000, 0.25);
    this.lastTime = nowMs;
    const dt = 1 / this.world.tick_rate;
    while (this.accumulator >= dt && this.tick < this.totalTicks) {
      this.advanceTick();
      this.accumulator -= dt;
    }
    if (this.tick >= this.totalTicks) {
      this.finish();
      return;
    }
    requestAnimationFrame(this.loop);
  };

  private advanceTick(): void {
    const mask = this.mask;
    this.keysLog.push(mask);
    step(this.state, mask, this.world);
    this.tick += 1;
    this.pos.push([this.state.x, this.state.y]);
    this.vel.push([this.state.vx, this.state.vy]);

    if (this.asPath) {
      const idx = Math.min(this.tick, this.asPath.length - 1);
      this.hooks.onAsFrame(this.asPath[idx][0], this.asPath[idx][1]);
    }
    const remaining = (this.totalTicks - this.tick) / this.world.tick_rate;
    this.hooks.onFrame(this.state, this.tick, remaining, remaining <= this.world.warning_lead);

    if (this.tick - this.flushedThrough >= FLUSH_INTERVAL_TICKS) {
      this.flush(false);
    }
  }

  /** Queue a frame batch; uploads chain so order is preserved. */
  private flush(final: boolean): void {
    const from = this.flushedThrough;
    const to = final ? this.pos.length : this.tick;
    if (to <= from && !final) {
      return;
    }
    const batch = {
      keys: final ? [...this.keysLog.slice(from), 0] : this.keysLog.slice(from, to),
      pos: this.pos.slice(from, to),
      vel: this.vel.slice(from, to),
      events: final ? this.events : undefined,
    };
    this.flushedThrough = to;
    this.uploads = this.uploads.then(() =>
      this.api.postFrames(this.session, this.trialIndex, batch, final)
    );
  }

  private finish(): void {
    this.running = false;
    this.flush(true);
    this.hooks.onDone();
  }

  /** Resolves with the final upload's response (the searcher's report). */
  async uploaded(): Promise<{ as_report?: number; color?: string }> {
    return (await this.uploads) as { as_report?: number; color?: string };
  }

  stop(): void {
    this.running = false;
  }
}
