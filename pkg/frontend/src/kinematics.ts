/**
 * Spotlight kinematics, mirrored expression-for-expression from the
 * simulation core so a replayed key trace produces bit-identical frames on
 * both sides (the server rejects uploads that do not replay exactly).
 * Do not reorder any arithmetic here.
 */

export const KEY_UP = 1;
export const KEY_DOWN = 2;
export const KEY_LEFT = 4;
export const KEY_RIGHT = 8;

/** World constants as served by the experiment server (snake_case wire). */
export interface World {
  field_size: number;
  grid_dim: number;
  cell_pitch: number;
  outlier_radius: number;
  agent_radius: number;
  tick_rate: number;
  trial_duration: number;
  warning_lead: number;
  accel: number;
  damping: number;
  max_speed: number;
}

export interface Kinematics {
  x: number;
  y: number;
  vx: number;
  vy: number;
}

/** Advance one tick under a key mask. Mutates and returns the state. */
export function step(state: Kinematics, keys: number, w: World): Kinematics {
  const dt = 1 / w.tick_rate;
  const right = (keys & KEY_RIGHT) !== 0;
  const left = (keys & KEY_LEFT) !== 0;
  const down = (keys & KEY_DOWN) !== 0;
  const up = (keys & KEY_UP) !== 0;
  const fx = (right ? w.accel : 0.0) - (left ? w.accel : 0.0);
  const fy = (down ? w.accel : 0.0) - (up ? w.accel : 0.0);
  const inx = right || left;
  const iny = down || up;

  let { x, y, vx, vy } = state;
  if (inx) {
    vx = vx + fx * dt;
  } else {
    vx = vx * w.damping;
  }
  if (iny) {
    vy = vy + fy * dt;
  } else {
    vy = vy * w.damping;
  }
  const speed2 = vx * vx + vy * vy;
  const ms2 = w.max_speed * w.max_speed;
  if (speed2 > ms2) {
    const scale = w.max_speed / Math.sqrt(speed2);
    vx = vx * scale;
    vy = vy * scale;
  }
  x = x + vx * dt;
  y = y + vy * dt;
  if (x < 0.0) {
    x = 0.0;
    vx = 0.0;
  } else if (x > w.field_size) {
    x = w.field_size;
    vx = 0.0;
  }
  if (y < 0.0) {
    y = 0.0;
    vy = 0.0;
  } else if (y > w.field_size) {
    y = w.field_size;
    vy = 0.0;
  }
  state.x = x;
  state.y = y;
  state.vx = vx;
  state.vy = vy;
  return state;
}

export interface FrameLog {
  keys: number[];
  pos: [number, number][];
  vel: [number, number][];
}

/** Replay a whole key trace from a start state; returns n+1 logged frames. */
export function replay(
  start: { x: number; y: number },
  keys: number[],
  w: World
): FrameLog {
  const state: Kinematics = { x: start.x, y: start.y, vx: 0.0, vy: 0.0 };
  const log: FrameLog = {
    keys: [...keys, 0],
    pos: [[state.x, state.y]],
    vel: [[state.vx, state.vy]],
  };
  for (const mask of keys) {
    step(state, mask, w);
    log.pos.push([state.x, state.y]);
    log.vel.push([state.vx, state.vy]);
  }
  return log;
}

export function fieldCenter(w: World): { x: number; y: number } {
  return { x: w.field_size / 2.0, y: w.field_size / 2.0 };
}
