/**
 * Browser entry point: connects over the WebSocket bridge, renders the scene
 * at display refresh with interpolation, maps keyboard/pointer input to the
 * tracker stand-in stream, and shows the HUD, captions, and facilitator
 * panel.
 */

import { ElementAudioSink, AudioChannel } from "./audio.js";
import { SessionClient } from "./client.js";
import { FacilitatorPanel } from "./facilitator.js";
import { InputMap } from "./input.js";
import { Role } from "./protocol.js";
import { renderScene, Viewport } from "./renderer.js";
import { WebSocketTransport } from "./transport.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function main(): void {
  const params = new URLSearchParams(window.location.search);
  const role = (params.get("role") === "facilitator" ? "facilitator" : "participant") as Role;
  const nickname = params.get("nickname") ?? "friend";
  const wsUrl = params.get("server") ?? `ws://${window.location.hostname}:8872`;

  const canvas = el<HTMLCanvasElement>("scene");
  const ctx = canvas.getContext("2d");
  if (!ctx) throw new Error("canvas 2d context unavailable");
  const hudEl = el<HTMLDivElement>("hud");
  const captionEl = el<HTMLDivElement>("caption");
  const bannerEl = el<HTMLDivElement>("banner");
  const panelEl = el<HTMLDivElement>("panel");
  const feedEl = el<HTMLUListElement>("feed");

  const audio = new AudioChannel(
    new ElementAudioSink((ref) => new Audio(ref)),
  );
  const client = new SessionClient(
    async () => {
      const transport = new WebSocketTransport(wsUrl);
      await transport.whenOpen();
      return transport;
    },
    {
      nickname,
      role,
      onDelta: (delta) => panel.noteDelta(delta),
      onSummary: (summary) => {
        panel.noteSummary(summary, client.scene.tick);
        bannerEl.textContent = `Session complete! Accuracy ${(summary.accuracy * 100).toFixed(0)}%`;
        bannerEl.hidden = false;
      },
      onConnectionChange: (connected) => {
        bannerEl.hidden = connected;
        bannerEl.textContent = connected ? "" : "Connection lost, retrying...";
      },
    },
    audio,
  );
  const panel = new FacilitatorPanel(client);
  const input = new InputMap(role);

  if (role === "facilitator") {
    panelEl.hidden = false;
    el<HTMLButtonElement>("btn-start").onclick = () => panel.start();
    el<HTMLButtonElement>("btn-pause").onclick = () => panel.pause();
    el<HTMLButtonElement>("btn-end").onclick = () => panel.end();
    el<HTMLButtonElement>("btn-support").onclick = () => panel.overrideDifficulty(3, 1);
  }

  window.addEventListener("keydown", (e) => input.handleKeyEvent({ type: "keydown", key: e.key }));
  window.addEventListener("keyup", (e) => input.handleKeyEvent({ type: "keyup", key: e.key }));
  canvas.addEventListener("pointerdown", (e) => {
    const rect = canvas.getBoundingClientRect();
    const fx = ((e.clientX - rect.left) / rect.width) * 14;
    const fy = (1 - (e.clientY - rect.top) / rect.height) * 8;
    input.setPointerTarget([fx, fy]);
  });
  canvas.addEventListener("pointerup", () => input.setPointerTarget(null));

  let seededFromServer = false;
  setInterval(() => {
    if (!client.connected) return;
    const snap = client.scene.snapshot();
    if (snap && !seededFromServer) {
      input.moveTo(snap.participant);
      seededFromServer = true;
    }
    const update = input.step();
    if (update) client.sendPosition(update);
  }, 1000 / 30);

  const draw = (): void => {
    const vp: Viewport = {
      width: canvas.width,
      height: canvas.height,
      fieldW: 14,
      fieldH: 8,
    };
    const view = client.scene.renderView(Date.now());
    if (view) {
      renderScene(ctx, view, vp);
      const hud = client.scene.hud;
      if (hud) {
        hudEl.textContent =
          `⭐ ${hud.collected}/${hud.target}  ` +
          `⏱ ${Math.ceil(hud.remaining_seconds)}s  ` +
          `(${view.phase})`;
      }
    }
    captionEl.textContent = audio.caption;
    if (role === "facilitator") {
      feedEl.innerHTML = panel.feed
        .slice(-12)
        .map((line) => `<li>[${line.tick}] ${line.text}</li>`)
        .join("");
    }
    requestAnimationFrame(draw);
  };

  void client.connect().then(() => requestAnimationFrame(draw));
}

main();
