import { describe, expect, it } from "vitest";

import { ChangedEntities, StateDelta, VehicleView } from "../src/protocol.js";
import { SceneModel } from "../src/scene.js";

function entities(overrides: Partial<ChangedEntities> = {}): ChangedEntities {
  return {
    areas: [
      { id: "safe_south", rect: [0, 0, 14, 2], safe: true },
      { id: "safe_north", rect: [0, 6, 14, 8], safe: true },
    ],
    participant: [7, 1],
    vehicles: [],
    pedestrians: [],
    star: { index: 0, pos: [4, 7] },
    phase: "training",
    difficulty: { scaffolding: 3, challenge: 1 },
    ...overrides,
  };
}

function delta(tick: number, overrides: Partial<ChangedEntities> = {}, collected = 0): StateDelta {
  return {
    type: "state_delta",
    tick,
    changed: entities(overrides),
    hud: { collected, target: 6, remaining_seconds: 180 - tick / 30 },
  };
}

function vehicle(id: number, overrides: Partial<VehicleView> = {}): VehicleView {
  return {
    id,
    style: "patient",
    lane: 1,
    pos: [2, 3],
    heading: 1,
    speed: 4,
    mode: "approach",
    gesture: null,
    ...overrides,
  };
}

describe("scene mirror", () => {
  it("maps gesture fields to overlay sprites", () => {
    const scene = new SceneModel();
    scene.applyDelta(delta(10, { vehicles: [vehicle(3, { gesture: "cross_invitation" })] }));
    expect(scene.gestureOverlays()).toEqual([{ id: 3, gesture: "cross_invitation" }]);
  });

  it("despawns entities omitted from the next delta", () => {
    const scene = new SceneModel();
    scene.applyDelta(delta(10, { vehicles: [vehicle(3)] }));
    expect(scene.snapshot()?.vehicles).toHaveLength(1);
    scene.applyDelta(delta(11, { vehicles: [] }));
    expect(scene.snapshot()?.vehicles).toHaveLength(0);
  });

  it("never skips a HUD counter across a 60s synthetic stream", () => {
    const scene = new SceneModel();
    const seen: number[] = [];
    let collected = 0;
    for (let tick = 0; tick < 1800; tick++) {
      if (tick > 0 && tick % 290 === 0 && collected < 6) collected += 1;
      scene.applyDelta(delta(tick, {}, collected));
      seen.push(scene.hud!.collected);
    }
    for (let i = 1; i < seen.length; i++) {
      expect(seen[i]! - seen[i - 1]!).toBeLessThanOrEqual(1);
      expect(seen[i]!).toBeGreaterThanOrEqual(seen[i - 1]!);
    }
    expect(seen[seen.length - 1]).toBe(6);
  });

  it("interpolates positions between the last two deltas", () => {
    const scene = new SceneModel();
    scene.applyDelta(delta(10, { vehicles: [vehicle(1, { pos: [2, 3] })] }), 1000);
    scene.applyDelta(delta(11, { vehicles: [vehicle(1, { pos: [3, 3] })] }), 1033.3);
    const midway = scene.renderView(1033.3 + 16.6, 33.3);
    expect(midway!.vehicles[0]!.pos[0]).toBeGreaterThan(2.4);
    expect(midway!.vehicles[0]!.pos[0]).toBeLessThan(3);
    const settled = scene.renderView(1033.3 + 100, 33.3);
    expect(settled!.vehicles[0]!.pos[0]).toBe(3);
  });

  it("does not interpolate freshly spawned entities", () => {
    const scene = new SceneModel();
    scene.applyDelta(delta(10, { vehicles: [] }), 1000);
    scene.applyDelta(delta(11, { vehicles: [vehicle(9, { pos: [5, 5] })] }), 1033);
    const view = scene.renderView(1040, 33.3);
    expect(view!.vehicles[0]!.pos).toEqual([5, 5]);
  });

  it("reset drops everything until the next delta", () => {
    const scene = new SceneModel();
    scene.applyDelta(delta(10));
    scene.reset();
    expect(scene.snapshot()).toBeNull();
    expect(scene.hud).toBeNull();
    expect(scene.phase).toBe("connecting");
  });
});
