/**
 * Session client: wires a transport to the scene mirror, audio channel, and
 * input stream. Stateless across reconnects: on drop it discards the scene
 * and rebuilds everything from the first delta after rejoining.
 */

import { AudioChannel } from "./audio.js";
import {
  Control,
  ControlCommand,
  ErrorMessage,
  Message,
  PositionUpdate,
  Role,
  SessionSummary,
  StateDelta,
} from "./protocol.js";
import { SceneModel } from "./scene.js";
import { Transport } from "./transport.js";

export interface ClientOptions {
  nickname: string;
  role: Role;
  reconnectDelayMs?: number;
  maxReconnects?: number;
  onDelta?: (delta: StateDelta) => void;
  onSummary?: (summary: SessionSummary) => void;
  onError?: (error: ErrorMessage) => void;
  onConnectionChange?: (connected: boolean) => void;
}

export class SessionClient {
  readonly scene = new SceneModel();
  readonly audio: AudioChannel;
  summary: SessionSummary | null = null;
  lastError: ErrorMessage | null = null;
  connected = false;
  private transport: Transport | null = null;
  private reconnects = 0;
  private closed = false;

  constructor(
    private connectTransport: () => Promise<Transport>,
    private options: ClientOptions,
    audio?: AudioChannel,
  ) {
    this.audio = audio ?? new AudioChannel();
  }

  async connect(): Promise<void> {
    const transport = await this.connectTransport();
    this.transport = transport;
    transport.onMessage((message) => this.route(message));
    transport.onClose(() => this.handleClose());
    transport.send({
      type: "client_hello",
      nickname: this.options.nickname,
      role: this.options.role,
    });
    this.connected = true;
    this.options.onConnectionChange?.(true);
  }

  private route(message: Message): void {
    switch (message.type) {
      case "state_delta":
        this.scene.applyDelta(message);
        this.options.onDelta?.(message);
        break;
      case "audio_cue":
        this.audio.play(message);
        break;
      case "session_summary":
        this.summary = message;
        this.options.onSummary?.(message);
        break;
      case "error":
        this.lastError = message;
        this.options.onError?.(message);
        break;
      default:
        break; // server never sends client-bound hello/position/control
    }
  }

  private handleClose(): void {
    this.connected = false;
    this.options.onConnectionChange?.(false);
    // The mirror is rebuilt entirely from the next delta after a rejoin.
    this.scene.reset();
    if (this.closed || this.summary) return;
    const max = this.options.maxReconnects ?? 5;
    if (this.reconnects >= max) return;
    this.reconnects += 1;
    const delay = this.options.reconnectDelayMs ?? 500;
    setTimeout(() => {
      if (!this.closed) void this.connect().catch(() => this.handleClose());
    }, delay);
  }

  sendPosition(update: PositionUpdate): void {
    if (this.connected && this.options.role === "participant") {
      this.transport?.send(update);
    }
  }

  sendControl(command: ControlCommand, extras?: { scaffolding?: number; challenge?: number }): void {
    if (!this.connected) return;
    const control: Control = { type: "control", command, ...extras };
    this.transport?.send(control);
  }

  close(): void {
    this.closed = true;
    this.transport?.close();
  }
}
