import { describe, expect, it } from "vitest";

import {
  decodeEnvelope,
  encodeEnvelope,
  encodeFrame,
  FrameDecoder,
  Message,
  ProtocolError,
  SchemaError,
  SequenceTracker,
  SequenceViolation,
  UnknownMessageType,
} from "../src/protocol.js";

const samples: Message[] = [
  { type: "client_hello", nickname: "Lele", role: "participant" },
  { type: "position_update", raw: [3.25, -1.5], client_tick: 42 },
  {
    type: "state_delta",
    tick: 120,
    changed: {
      areas: [{ id: "safe_south", rect: [0, 0, 14, 2], safe: true }],
      participant: [7, 1],
      vehicles: [
        {
          id: 3,
          style: "patient",
          lane: 1,
          pos: [2.5, 3],
          heading: 1,
          speed: 4,
          mode: "approach",
          gesture: "cross_invitation",
        },
      ],
      pedestrians: [{ id: "ped_0", pos: [4, 6.8] }],
      star: { index: 2, pos: [10, 1] },
      phase: "training",
      difficulty: { scaffolding: 3, challenge: 1 },
    },
    hud: { collected: 2, target: 6, remaining_seconds: 93.2 },
  },
  { type: "audio_cue", utterance_id: "u7", text: "Take your time!", audio_ref: null },
  { type: "control", command: "difficulty_override", scaffolding: 3, challenge: 1 },
  { type: "control", command: "start" },
  {
    type: "session_summary",
    outcomes: [{ trial_id: 1, verdict: "correct" }],
    accuracy: 0.8,
  },
  { type: "error", code: "role_conflict", detail: "a participant is already connected" },
];

describe("envelope codec", () => {
  it("round-trips every message type", () => {
    samples.forEach((message, i) => {
      const { seq, message: decoded } = decodeEnvelope(encodeEnvelope(message, i + 1));
      expect(seq).toBe(i + 1);
      expect(decoded).toEqual(message);
    });
  });

  it("rejects non-JSON payloads", () => {
    expect(() => decodeEnvelope("{nope")).toThrow(ProtocolError);
  });

  it("rejects unknown message types", () => {
    expect(() => decodeEnvelope(JSON.stringify({ seq: 1, type: "teleport" }))).toThrow(
      UnknownMessageType,
    );
  });

  it("rejects missing fields and bad seq", () => {
    expect(() =>
      decodeEnvelope(JSON.stringify({ seq: 1, type: "client_hello", nickname: "x" })),
    ).toThrow(SchemaError);
    expect(() =>
      decodeEnvelope(JSON.stringify({ seq: 0, type: "control", command: "start" })),
    ).toThrow(SchemaError);
  });
});

describe("sequence tracker", () => {
  it("accepts strictly increasing numbers", () => {
    const tracker = new SequenceTracker();
    [1, 2, 9].forEach((n) => tracker.validate(n));
  });

  it("rejects replays and reorders", () => {
    const tracker = new SequenceTracker();
    tracker.validate(5);
    expect(() => tracker.validate(5)).toThrow(SequenceViolation);
    expect(() => tracker.validate(3)).toThrow(SequenceViolation);
  });
});

describe("length-prefixed framing", () => {
  it("splits a byte stream back into payloads", () => {
    const decoder = new FrameDecoder();
    const a = encodeFrame("first payload");
    const b = encodeFrame("second");
    const merged = new Uint8Array(a.length + b.length);
    merged.set(a, 0);
    merged.set(b, a.length);
    expect(decoder.feed(merged)).toEqual(["first payload", "second"]);
  });

  it("handles frames split across arbitrary chunk boundaries", () => {
    const decoder = new FrameDecoder();
    const frame = encodeFrame(JSON.stringify({ seq: 1, type: "control", command: "start" }));
    const out: string[] = [];
    for (let i = 0; i < frame.length; i += 3) {
      out.push(...decoder.feed(frame.slice(i, i + 3)));
    }
    expect(out).toHaveLength(1);
    expect(JSON.parse(out[0]!)).toMatchObject({ type: "control" });
  });
});
