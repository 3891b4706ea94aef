import { describe, expect, it } from "vitest";

import { AudioChannel, AudioSink } from "../src/audio.js";
import { AudioCue } from "../src/protocol.js";

function cue(id: string, text: string, ref: string | null = null): AudioCue {
  return { type: "audio_cue", utterance_id: id, text, audio_ref: ref };
}

class RecordingSink implements AudioSink {
  log: string[] = [];
  play(ref: string): void {
    this.log.push(`play:${ref}`);
  }
  stop(): void {
    this.log.push("stop");
  }
}

describe("single-channel narration", () => {
  it("a new cue preempts the previous one", () => {
    const sink = new RecordingSink();
    const channel = new AudioChannel(sink);
    channel.play(cue("u1", "first line", "a.wav"));
    channel.play(cue("u2", "second line", "b.wav"));
    expect(sink.log).toEqual(["play:a.wav", "stop", "play:b.wav"]);
    expect(channel.current?.utterance_id).toBe("u2");
  });

  it("captions always show, even for silent cues", () => {
    const channel = new AudioChannel(new RecordingSink());
    channel.play(cue("u1", "caption only", null));
    expect(channel.caption).toBe("caption only");
    expect(channel.played).toEqual(["u1"]);
  });

  it("playback order is recorded for every cue", () => {
    const channel = new AudioChannel(null);
    channel.play(cue("u1", "one"));
    channel.play(cue("u2", "two"));
    channel.play(cue("u3", "three"));
    expect(channel.played).toEqual(["u1", "u2", "u3"]);
  });
});
