import { describe, expect, it } from "vitest";

import { InputMap, WALK_SPEED_CAP } from "../src/input.js";

describe("tracker stand-in", () => {
  it("caps a held arrow at walking speed over one second", () => {
    const input = new InputMap("participant", [0, 0]);
    input.handleKeyEvent({ type: "keydown", key: "ArrowRight" });
    let last = input.step()!;
    for (let i = 1; i < 30; i++) last = input.step()!;
    expect(last.raw[0]).toBeLessThanOrEqual(WALK_SPEED_CAP + 1e-9);
    expect(last.raw[0]).toBeGreaterThan(WALK_SPEED_CAP * 0.95);
    expect(last.raw[1]).toBe(0);
  });

  it("caps diagonal movement at the same speed", () => {
    const input = new InputMap("participant", [0, 0]);
    input.handleKeyEvent({ type: "keydown", key: "ArrowRight" });
    input.handleKeyEvent({ type: "keydown", key: "ArrowUp" });
    for (let i = 0; i < 30; i++) input.step();
    const [x, y] = input.position;
    expect(Math.hypot(x, y)).toBeLessThanOrEqual(WALK_SPEED_CAP + 1e-9);
  });

  it("emits a heartbeat with unchanged coordinates when idle", () => {
    const input = new InputMap("participant", [3, 4]);
    const first = input.step()!;
    const second = input.step()!;
    expect(first.raw).toEqual([3, 4]);
    expect(second.raw).toEqual([3, 4]);
    expect(second.client_tick).toBe(first.client_tick + 1);
  });

  it("facilitator role emits nothing", () => {
    const input = new InputMap("facilitator", [0, 0]);
    input.handleKeyEvent({ type: "keydown", key: "ArrowRight" });
    expect(input.step()).toBeNull();
  });

  it("keyup stops movement", () => {
    const input = new InputMap("participant", [0, 0]);
    input.handleKeyEvent({ type: "keydown", key: "ArrowRight" });
    input.step();
    input.handleKeyEvent({ type: "keyup", key: "ArrowRight" });
    const before = input.position[0];
    input.step();
    expect(input.position[0]).toBe(before);
  });

  it("pointer homing approaches without overshooting", () => {
    const input = new InputMap("participant", [0, 0]);
    input.setPointerTarget([0.5, 0]);
    for (let i = 0; i < 12; i++) {
      input.step();
      expect(input.position[0]).toBeLessThanOrEqual(0.5 + 1e-9);
    }
    expect(input.position[0]).toBeGreaterThan(0.42);
  });
});
