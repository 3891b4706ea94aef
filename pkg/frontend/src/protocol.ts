/**
 * Wire protocol mirror: JSON message envelopes with per-direction sequence
 * numbers, plus the 4-byte big-endian length framing used on raw TCP.
 * WebSocket transports skip the framing layer (one message per text frame).
 */

export type Role = "participant" | "facilitator";
export type ControlCommand = "start" | "pause" | "difficulty_override" | "end";

export interface ClientHello {
  type: "client_hello";
  nickname: string;
  role: Role;
}

export interface PositionUpdate {
  type: "position_update";
  raw: [number, number];
  client_tick: number;
}

export interface Hud {
  collected: number;
  target: number;
  remaining_seconds: number;
}

export interface AreaView {
  id: string;
  rect: [number, number, number, number];
  safe: boolean;
}

export interface VehicleView {
  id: number;
  style: string;
  lane: number;
  pos: [number, number];
  heading: number;
  speed: number;
  mode: string;
  gesture: string | null;
}

export interface PedestrianView {
  id: string;
  pos: [number, number];
}

export interface StarView {
  index: number;
  pos: [number, number];
}

export interface ChangedEntities {
  areas: AreaView[];
  participant: [number, number];
  vehicles: VehicleView[];
  pedestrians: PedestrianView[];
  star: StarView | null;
  phase: string;
  difficulty: { scaffolding: number; challenge: number };
}

export interface StateDelta {
  type: "state_delta";
  tick: number;
  changed: ChangedEntities;
  hud: Hud;
}

export interface AudioCue {
  type: "audio_cue";
  utterance_id: string;
  text: string;
  audio_ref: string | null;
}

export interface Control {
  type: "control";
  command: ControlCommand;
  scaffolding?: number;
  challenge?: number;
}

export interface SessionSummary {
  type: "session_summary";
  outcomes: Array<Record<string, unknown>>;
  accuracy: number;
}

export interface ErrorMessage {
  type: "error";
  code: string;
  detail: string;
}

export type Message =
  | ClientHello
  | PositionUpdate
  | StateDelta
  | AudioCue
  | Control
  | SessionSummary
  | ErrorMessage;

export class ProtocolError extends Error {}
export class SchemaError extends ProtocolError {}
export class UnknownMessageType extends ProtocolError {}
export class SequenceViolation extends ProtocolError {}

const MESSAGE_TYPES = new Set([
  "client_hello",
  "position_update",
  "state_delta",
  "audio_cue",
  "control",
  "session_summary",
  "error",
]);

export function encodeEnvelope(message: Message, seq: number): string {
  return JSON.stringify({ seq, ...message });
}

function need(obj: Record<string, unknown>, key: string): unknown {
  if (!(key in obj)) throw new SchemaError(`message missing field '${key}'`);
  return obj[key];
}

function vec2(value: unknown, what: string): [number, number] {
  if (!Array.isArray(value) || value.length !== 2) {
    throw new SchemaError(`${what} must be a 2-element array`);
  }
  return [Number(value[0]), Number(value[1])];
}

export function decodeEnvelope(text: string): { seq: number; message: Message } {
  let obj: Record<string, unknown>;
  try {
    obj = JSON.parse(text);
  } catch (err) {
    throw new ProtocolError(`frame payload is not valid JSON: ${err}`);
  }
  if (typeof obj !== "object" || obj === null) {
    throw new SchemaError("message must be a JSON object");
  }
  const seq = need(obj, "seq");
  if (typeof seq !== "number" || !Number.isInteger(seq) || seq < 1) {
    throw new SchemaError("seq must be a positive integer");
  }
  const type = need(obj, "type");
  if (typeof type !== "string" || !MESSAGE_TYPES.has(type)) {
    throw new UnknownMessageType(`unknown message type '${String(type)}'`);
  }
  switch (type) {
    case "client_hello": {
      const role = need(obj, "role");
      if (role !== "participant" && role !== "facilitator") {
        throw new SchemaError(`unknown role '${String(role)}'`);
      }
      return {
        seq,
        message: { type, nickname: String(need(obj, "nickname")), role },
      };
    }
    case "position_update":
      return {
        seq,
        message: {
          type,
          raw: vec2(need(obj, "raw"), "raw"),
          client_tick: Number(need(obj, "client_tick")),
        },
      };
    case "state_delta": {
      const hud = need(obj, "hud") as Record<string, unknown>;
      return {
        seq,
        message: {
          type,
          tick: Number(need(obj, "tick")),
          changed: need(obj, "changed") as ChangedEntities,
          hud: {
            collected: Number(need(hud, "collected")),
            target: Number(need(hud, "target")),
            remaining_seconds: Number(need(hud, "remaining_seconds")),
          },
        },
      };
    }
    case "audio_cue": {
      const ref = need(obj, "audio_ref");
      return {
        seq,
        message: {
          type,
          utterance_id: String(need(obj, "utterance_id")),
          text: String(need(obj, "text")),
          audio_ref: ref === null ? null : String(ref),
        },
      };
    }
    case "control": {
      const command = need(obj, "command");
      if (
        command !== "start" &&
        command !== "pause" &&
        command !== "difficulty_override" &&
        command !== "end"
      ) {
        throw new SchemaError(`unknown control command '${String(command)}'`);
      }
      const message: Control = { type, command };
      if (obj.scaffolding !== undefined) message.scaffolding = Number(obj.scaffolding);
      if (obj.challenge !== undefined) message.challenge = Number(obj.challenge);
      return { seq, message };
    }
    case "session_summary":
      return {
        seq,
        message: {
          type,
          outcomes: need(obj, "outcomes") as Array<Record<string, unknown>>,
          accuracy: Number(need(obj, "accuracy")),
        },
      };
    default:
      return {
        seq,
        message: {
          type: "error",
          code: String(need(obj, "code")),
          detail: String(need(obj, "detail")),
        },
      };
  }
}

export class SequenceTracker {
  private last = 0;

  validate(seq: number): void {
    if (seq <= this.last) {
      throw new SequenceViolation(`seq ${seq} after ${this.last}: replayed or reordered`);
    }
    this.last = seq;
  }
}

/** 4-byte big-endian length prefix framing for the raw TCP transport. */
export function encodeFrame(payload: string): Uint8Array {
  const body = new TextEncoder().encode(payload);
  const frame = new Uint8Array(4 + body.length);
  new DataView(frame.buffer).setUint32(0, body.length, false);
  frame.set(body, 4);
  return frame;
}

/** Incremental frame splitter: feed bytes, collect whole payload strings. */
export class FrameDecoder {
  private buffer = new Uint8Array(0);

  feed(chunk: Uint8Array): string[] {
    const merged = new Uint8Array(this.buffer.length + chunk.length);
    merged.set(this.buffer, 0);
    merged.set(chunk, this.buffer.length);
    this.buffer = merged;

    const out: string[] = [];
    for (;;) {
      if (this.buffer.length < 4) break;
      const view = new DataView(this.buffer.buffer, this.buffer.byteOffset);
      const length = view.getUint32(0, false);
      if (this.buffer.length < 4 + length) break;
      const body = this.buffer.slice(4, 4 + length);
      out.push(new TextDecoder().decode(body));
      this.buffer = this.buffer.slice(4 + length);
    }
    return out;
  }
}
