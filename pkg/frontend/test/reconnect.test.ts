/**
 * Reconnect acceptance: killing and rejoining the UI mid-session rebuilds an
 * identical scene purely from the next full StateDelta.
 */

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { SceneModel } from "../src/scene.js";
import { DeltaStream, ServerHandle, startServer } from "./harness.js";

describe("mid-session reconnect", () => {
  let server: ServerHandle;
  let stream: DeltaStream;

  beforeAll(async () => {
    server = await startServer({ pacing: "realtime", seed: 7 });
    stream = new DeltaStream(server.port, "participant", "Lele", 300);
    await stream.client.connect();
    await stream.nextDelta();
    stream.client.sendControl("start");
  }, 60_000);

  afterAll(() => {
    stream?.client.close();
    server?.stop();
  });

  it("rebuilds the scene from the first delta after rejoining", async () => {
    // Let the session run a bit, then hard-kill the connection.
    let last = await stream.nextDelta();
    const killAfter = last.tick + 15;
    while (last.tick < killAfter) last = await stream.nextDelta();
    expect(stream.client.connected).toBe(true);

    stream.lastTransport!.close();
    // The client notices, resets its mirror, and reconnects on its own.
    await new Promise((resolve) => setTimeout(resolve, 100));
    expect(stream.client.scene.connected).toBe(false);

    stream.dropQueued();
    const rejoined = await stream.nextDelta(20_000);

    // The scene mirror must now equal what a brand-new client would build
    // from that same delta alone.
    const fresh = new SceneModel();
    fresh.applyDelta(rejoined);
    expect(stream.client.scene.snapshot()).toEqual(fresh.snapshot());
    expect(stream.client.scene.hud).toEqual(fresh.hud);

    const snap = stream.client.scene.snapshot()!;
    expect(snap.phase).toBe("training");
    expect(snap.areas.length).toBeGreaterThanOrEqual(7);
    expect(snap.participant).toHaveLength(2);
    expect(rejoined.tick).toBeGreaterThan(killAfter);
  }, 60_000);
});
