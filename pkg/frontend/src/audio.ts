/**
 * Single-channel narration: one driver speaks at a time, a new cue preempts
 * the old one, and the caption always shows the text so the silent TTS path
 * is fully usable.
 */

import { AudioCue } from "./protocol.js";

export interface AudioSink {
  play(ref: string): void;
  stop(): void;
}

/** Browser sink backed by a single HTMLAudioElement. */
export class ElementAudioSink implements AudioSink {
  private element: { src: string; play(): unknown; pause(): void } | null = null;

  constructor(private createElement: (ref: string) => { src: string; play(): unknown; pause(): void }) {}

  play(ref: string): void {
    this.stop();
    this.element = this.createElement(ref);
    void this.element.play();
  }

  stop(): void {
    if (this.element) {
      this.element.pause();
      this.element = null;
    }
  }
}

export class AudioChannel {
  caption = "";
  current: AudioCue | null = null;
  readonly played: string[] = []; // utterance ids, in playback order

  constructor(private sink: AudioSink | null = null) {}

  play(cue: AudioCue): void {
    if (this.current && this.sink) {
      this.sink.stop(); // preempt: never two voices at once
    }
    this.current = cue;
    this.caption = cue.text;
    this.played.push(cue.utterance_id);
    if (cue.audio_ref && this.sink) {
      this.sink.play(cue.audio_ref);
    }
  }

  clear(): void {
    if (this.sink) this.sink.stop();
    this.current = null;
    this.caption = "";
  }
}
