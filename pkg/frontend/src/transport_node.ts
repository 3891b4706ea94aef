/**
 * Node-only transport over raw TCP with length-prefixed frames; used by the
 * test harnesses and any non-browser host. Kept out of the browser build.
 */

import net from "node:net";

import {
  decodeEnvelope,
  encodeEnvelope,
  encodeFrame,
  FrameDecoder,
  Message,
  SequenceTracker,
} from "./protocol.js";
import { Transport } from "./transport.js";

export class TcpTransport implements Transport {
  private outSeq = 0;
  private inTrack = new SequenceTracker();
  private handlers: Array<(message: Message) => void> = [];
  private closers: Array<() => void> = [];
  private decoder = new FrameDecoder();

  private constructor(private socket: net.Socket) {
    socket.on("data", (chunk: Buffer) => {
      for (const payload of this.decoder.feed(new Uint8Array(chunk))) {
        const { seq, message } = decodeEnvelope(payload);
        this.inTrack.validate(seq);
        for (const handler of this.handlers) handler(message);
      }
    });
    socket.on("close", () => {
      for (const closer of this.closers) closer();
    });
    socket.on("error", () => {
      /* surfaced via close */
    });
  }

  static async connect(host: string, port: number): Promise<TcpTransport> {
    const socket = new net.Socket();
    await new Promise<void>((resolve, reject) => {
      socket.once("error", reject);
      socket.connect(port, host, () => {
        socket.removeListener("error", reject);
        resolve();
      });
    });
    socket.setNoDelay(true);
    return new TcpTransport(socket);
  }

  send(message: Message): void {
    this.socket.write(encodeFrame(encodeEnvelope(message, ++this.outSeq)));
  }

  onMessage(handler: (message: Message) => void): void {
    this.handlers.push(handler);
  }

  onClose(handler: () => void): void {
    this.closers.push(handler);
  }

  close(): void {
    this.socket.destroy();
  }
}
