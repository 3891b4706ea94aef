/**
 * Tracker stand-in: arrow keys (or a pointer drag target) move the avatar in
 * raw coordinates at walking speed, emitted as PositionUpdate payloads at the
 * tick rate. Idle ticks still emit a heartbeat with unchanged coordinates.
 * Only the participant role emits anything.
 */

import { PositionUpdate, Role } from "./protocol.js";

export const WALK_SPEED_CAP = 2.5; // raw units (meters) per second

export interface KeyEventLike {
  type: "keydown" | "keyup";
  key: string;
}

const KEY_VECTORS: Record<string, [number, number]> = {
  ArrowLeft: [-1, 0],
  ArrowRight: [1, 0],
  ArrowUp: [0, 1],
  ArrowDown: [0, -1],
  a: [-1, 0],
  d: [1, 0],
  w: [0, 1],
  s: [0, -1],
};

export class InputMap {
  private held = new Set<string>();
  private pointerTarget: [number, number] | null = null;
  private pos: [number, number];
  private clientTick = 0;

  constructor(
    private role: Role,
    start: [number, number] = [0, 0],
    private tickHz = 30,
    private speedCap = WALK_SPEED_CAP,
  ) {
    this.pos = [start[0], start[1]];
  }

  get position(): [number, number] {
    return [this.pos[0], this.pos[1]];
  }

  moveTo(pos: [number, number]): void {
    this.pos = [pos[0], pos[1]];
  }

  handleKeyEvent(event: KeyEventLike): void {
    if (!(event.key in KEY_VECTORS)) return;
    if (event.type === "keydown") this.held.add(event.key);
    else this.held.delete(event.key);
  }

  setPointerTarget(target: [number, number] | null): void {
    this.pointerTarget = target ? [target[0], target[1]] : null;
  }

  /** One tick of movement; null when this role does not drive the avatar. */
  step(): PositionUpdate | null {
    if (this.role !== "participant") return null;
    const maxStep = this.speedCap / this.tickHz;

    let dx = 0;
    let dy = 0;
    for (const key of this.held) {
      const vec = KEY_VECTORS[key];
      if (vec) {
        dx += vec[0];
        dy += vec[1];
      }
    }
    if (dx === 0 && dy === 0 && this.pointerTarget) {
      dx = this.pointerTarget[0] - this.pos[0];
      dy = this.pointerTarget[1] - this.pos[1];
      if (Math.hypot(dx, dy) < 0.05) {
        dx = 0;
        dy = 0;
      }
    }
    const norm = Math.hypot(dx, dy);
    if (norm > 1e-9) {
      // Keyboard vectors move at the full cap; pointer homing never
      // overshoots the target.
      const displacement = this.pointerTarget && !this.held.size
        ? Math.min(maxStep, norm)
        : maxStep;
      const factor = displacement / norm;
      this.pos = [this.pos[0] + dx * factor, this.pos[1] + dy * factor];
    }
    return {
      type: "position_update",
      raw: [this.pos[0], this.pos[1]],
      client_tick: this.clientTick++,
    };
  }
}
