/**
 * Transport abstraction: one message in, one message out, plus close
 * notification. The browser build uses WebSocketTransport; tests and other
 * Node hosts use the TcpTransport from transport_node.ts, which adds the
 * length-prefix framing.
 */

import { decodeEnvelope, encodeEnvelope, Message, SequenceTracker } from "./protocol.js";

export interface Transport {
  send(message: Message): void;
  onMessage(handler: (message: Message) => void): void;
  onClose(handler: () => void): void;
  close(): void;
}

export class WebSocketTransport implements Transport {
  private outSeq = 0;
  private inTrack = new SequenceTracker();
  private handlers: Array<(message: Message) => void> = [];
  private closers: Array<() => void> = [];
  private socket: WebSocket;
  private ready: Promise<void>;
  private queue: string[] = [];

  constructor(url: string) {
    this.socket = new WebSocket(url);
    this.ready = new Promise((resolve) => {
      this.socket.addEventListener("open", () => {
        for (const payload of this.queue) this.socket.send(payload);
        this.queue = [];
        resolve();
      });
    });
    this.socket.addEventListener("message", (event) => {
      const { seq, message } = decodeEnvelope(String(event.data));
      this.inTrack.validate(seq);
      for (const handler of this.handlers) handler(message);
    });
    this.socket.addEventListener("close", () => {
      for (const closer of this.closers) closer();
    });
  }

  send(message: Message): void {
    const payload = encodeEnvelope(message, ++this.outSeq);
    if (this.socket.readyState === WebSocket.OPEN) {
      this.socket.send(payload);
    } else {
      this.queue.push(payload);
    }
  }

  onMessage(handler: (message: Message) => void): void {
    this.handlers.push(handler);
  }

  onClose(handler: () => void): void {
    this.closers.push(handler);
  }

  close(): void {
    this.socket.close();
  }

  whenOpen(): Promise<void> {
    return this.ready;
  }
}
