/**
 * Facilitator-side session controls and a live event feed assembled from the
 * broadcast stream (deltas, cues, summary) for the journal-tail view.
 */

import { SessionClient } from "./client.js";
import { AudioCue, SessionSummary, StateDelta } from "./protocol.js";

export interface FeedLine {
  tick: number;
  text: string;
}

export class FacilitatorPanel {
  readonly feed: FeedLine[] = [];
  private lastPhase = "";
  private lastCollected = -1;
  private lastDifficulty = "";

  constructor(
    private client: SessionClient,
    private feedLimit = 200,
  ) {}

  get enabled(): boolean {
    return this.client.connected;
  }

  start(): void {
    this.client.sendControl("start");
  }

  pause(): void {
    this.client.sendControl("pause");
  }

  end(): void {
    this.client.sendControl("end");
  }

  overrideDifficulty(scaffolding: number, challenge: number): void {
    this.client.sendControl("difficulty_override", { scaffolding, challenge });
  }

  private push(tick: number, text: string): void {
    this.feed.push({ tick, text });
    if (this.feed.length > this.feedLimit) this.feed.shift();
  }

  noteDelta(delta: StateDelta): void {
    const c = delta.changed;
    if (c.phase !== this.lastPhase) {
      this.push(delta.tick, `phase: ${c.phase}`);
      this.lastPhase = c.phase;
    }
    if (delta.hud.collected !== this.lastCollected) {
      this.push(delta.tick, `stars: ${delta.hud.collected}/${delta.hud.target}`);
      this.lastCollected = delta.hud.collected;
    }
    const difficulty = `support ${c.difficulty.scaffolding} / challenge ${c.difficulty.challenge}`;
    if (difficulty !== this.lastDifficulty) {
      this.push(delta.tick, difficulty);
      this.lastDifficulty = difficulty;
    }
  }

  noteCue(cue: AudioCue, tick: number): void {
    this.push(tick, `voice: ${cue.text}`);
  }

  noteSummary(summary: SessionSummary, tick: number): void {
    this.push(
      tick,
      `session over: ${summary.outcomes.length} trials, accuracy ${(summary.accuracy * 100).toFixed(1)}%`,
    );
  }
}
