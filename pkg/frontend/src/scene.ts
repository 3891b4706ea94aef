/**
 * Client-side scene mirror. Renders server-confirmed state only: every
 * StateDelta is a full authoritative snapshot, entities omitted from a delta
 * are gone, and no outcomes are predicted locally. Keeps the previous delta
 * around so the renderer can interpolate between server ticks.
 */

import { ChangedEntities, Hud, StateDelta, VehicleView } from "./protocol.js";

export interface SceneView {
  areas: ChangedEntities["areas"];
  participant: [number, number];
  vehicles: VehicleView[];
  pedestrians: ChangedEntities["pedestrians"];
  star: ChangedEntities["star"];
  phase: string;
  difficulty: ChangedEntities["difficulty"];
}

function lerp(a: number, b: number, t: number): number {
  return a + (b - a) * t;
}

export class SceneModel {
  private current: StateDelta | null = null;
  private previous: StateDelta | null = null;
  private currentAtMs = 0;
  hud: Hud | null = null;

  get tick(): number {
    return this.current?.tick ?? -1;
  }

  get phase(): string {
    return this.current?.changed.phase ?? "connecting";
  }

  get connected(): boolean {
    return this.current !== null;
  }

  /** Drop all mirrored state; the next delta rebuilds the scene from scratch. */
  reset(): void {
    this.current = null;
    this.previous = null;
    this.hud = null;
  }

  applyDelta(delta: StateDelta, nowMs: number = Date.now()): void {
    this.previous = this.current;
    this.current = delta;
    this.currentAtMs = nowMs;
    this.hud = delta.hud;
  }

  /** Authoritative view of the latest server state. */
  snapshot(): SceneView | null {
    if (!this.current) return null;
    const c = this.current.changed;
    return {
      areas: c.areas,
      participant: c.participant,
      vehicles: c.vehicles,
      pedestrians: c.pedestrians,
      star: c.star,
      phase: c.phase,
      difficulty: c.difficulty,
    };
  }

  /**
   * View for drawing between ticks: positions of entities present in both of
   * the last two deltas are interpolated; everything else follows the latest
   * snapshot (including despawns, which take effect immediately).
   */
  renderView(nowMs: number, tickMs = 1000 / 30): SceneView | null {
    const snap = this.snapshot();
    if (!snap || !this.previous || !this.current) return snap;
    const alpha = Math.max(0, Math.min(1, (nowMs - this.currentAtMs) / tickMs));
    if (alpha >= 1) return snap;
    const prev = this.previous.changed;

    const prevVehicles = new Map(prev.vehicles.map((v) => [v.id, v]));
    const vehicles = snap.vehicles.map((v) => {
      const was = prevVehicles.get(v.id);
      if (!was) return v;
      return {
        ...v,
        pos: [lerp(was.pos[0], v.pos[0], alpha), lerp(was.pos[1], v.pos[1], alpha)] as [
          number,
          number,
        ],
      };
    });

    const prevPeds = new Map(prev.pedestrians.map((p) => [p.id, p]));
    const pedestrians = snap.pedestrians.map((p) => {
      const was = prevPeds.get(p.id);
      if (!was) return p;
      return {
        ...p,
        pos: [lerp(was.pos[0], p.pos[0], alpha), lerp(was.pos[1], p.pos[1], alpha)] as [
          number,
          number,
        ],
      };
    });

    const participant: [number, number] = [
      lerp(prev.participant[0], snap.participant[0], alpha),
      lerp(prev.participant[1], snap.participant[1], alpha),
    ];

    return { ...snap, vehicles, pedestrians, participant };
  }

  /** Vehicle ids currently carrying a visible gesture overlay. */
  gestureOverlays(): Array<{ id: number; gesture: string }> {
    const snap = this.snapshot();
    if (!snap) return [];
    return snap.vehicles
      .filter((v) => v.gesture !== null)
      .map((v) => ({ id: v.id, gesture: v.gesture as string }));
  }
}
