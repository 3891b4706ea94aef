/**
 * Flat top-down cartoon renderer: bright palette, chunky shapes, no realism.
 * Draws against a minimal 2D-context interface so tests can record calls.
 */

import { SceneView } from "./scene.js";

export interface Ctx2D {
  fillStyle: string | CanvasGradient | CanvasPattern;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  font: string;
  textAlign: string;
  fillRect(x: number, y: number, w: number, h: number): void;
  strokeRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  closePath(): void;
  fill(): void;
  stroke(): void;
  fillText(text: string, x: number, y: number): void;
  save(): void;
  restore(): void;
}

export const STYLE_COLORS: Record<string, string> = {
  patient: "#58c470",
  anxious: "#f2c14e",
  risky: "#e4572e",
  dissociative: "#9b7ede",
};

export const GESTURE_GLYPHS: Record<string, string> = {
  cross_invitation: "👋",
  warning: "✋",
};

export interface Viewport {
  width: number;
  height: number;
  fieldW: number;
  fieldH: number;
}

function sx(viewport: Viewport, x: number): number {
  return (x / viewport.fieldW) * viewport.width;
}

function sy(viewport: Viewport, y: number): number {
  // World y grows northward; canvas y grows downward.
  return viewport.height - (y / viewport.fieldH) * viewport.height;
}

function drawAreas(ctx: Ctx2D, view: SceneView, vp: Viewport): void {
  for (const area of view.areas) {
    const [x0, y0, x1, y1] = area.rect;
    const px = sx(vp, x0);
    const py = sy(vp, y1);
    const w = sx(vp, x1) - sx(vp, x0);
    const h = sy(vp, y0) - sy(vp, y1);
    ctx.fillStyle = area.safe ? "#9fd983" : "#8b8f98";
    ctx.fillRect(px, py, w, h);
    if (area.id.startsWith("crosswalk")) {
      ctx.fillStyle = "#f4f4f0";
      const stripes = 5;
      for (let i = 0; i < stripes; i++) {
        const stripeY = py + (h * (2 * i + 0.5)) / (2 * stripes);
        ctx.fillRect(px + w * 0.1, stripeY, w * 0.8, h / (2 * stripes) / 1.5);
      }
    }
  }
}

function drawStar(ctx: Ctx2D, view: SceneView, vp: Viewport): void {
  if (!view.star) return;
  const [x, y] = view.star.pos;
  const cx = sx(vp, x);
  const cy = sy(vp, y);
  const outer = Math.min(vp.width, vp.height) * 0.03;
  ctx.fillStyle = "#ffd700";
  ctx.beginPath();
  for (let i = 0; i < 10; i++) {
    const r = i % 2 === 0 ? outer : outer * 0.45;
    const angle = (Math.PI / 5) * i - Math.PI / 2;
    const px = cx + r * Math.cos(angle);
    const py = cy + r * Math.sin(angle);
    if (i === 0) ctx.moveTo(px, py);
    else ctx.lineTo(px, py);
  }
  ctx.closePath();
  ctx.fill();
}

function drawVehicles(ctx: Ctx2D, view: SceneView, vp: Viewport): void {
  for (const vehicle of view.vehicles) {
    const [x, y] = vehicle.pos;
    const w = (4.0 / vp.fieldW) * vp.width;
    const h = (1.8 / vp.fieldH) * vp.height;
    const cx = sx(vp, x);
    const cy = sy(vp, y);
    ctx.fillStyle = STYLE_COLORS[vehicle.style] ?? "#777";
    ctx.fillRect(cx - w / 2, cy - h / 2, w, h);
    ctx.fillStyle = "#bfe6ff";
    const cab = w * 0.28;
    const cabX = vehicle.heading > 0 ? cx + w * 0.08 : cx - w * 0.08 - cab;
    ctx.fillRect(cabX, cy - h * 0.32, cab, h * 0.64);
    if (vehicle.gesture) {
      ctx.font = "16px sans-serif";
      ctx.textAlign = "center";
      ctx.fillStyle = "#222";
      ctx.fillText(GESTURE_GLYPHS[vehicle.gesture] ?? "?", cx, cy - h);
    }
  }
}

function drawPedestrians(ctx: Ctx2D, view: SceneView, vp: Viewport): void {
  for (const ped of view.pedestrians) {
    ctx.fillStyle = "#4477aa";
    ctx.beginPath();
    ctx.arc(sx(vp, ped.pos[0]), sy(vp, ped.pos[1]), 5, 0, Math.PI * 2);
    ctx.fill();
  }
}

function drawAvatar(ctx: Ctx2D, view: SceneView, vp: Viewport): void {
  const [x, y] = view.participant;
  const cx = sx(vp, x);
  const cy = sy(vp, y);
  ctx.fillStyle = "#ff9dbb";
  ctx.beginPath();
  ctx.arc(cx, cy, 8, 0, Math.PI * 2);
  ctx.fill();
  ctx.fillStyle = "#222";
  ctx.beginPath();
  ctx.arc(cx - 2.5, cy - 1.5, 1.2, 0, Math.PI * 2);
  ctx.arc(cx + 2.5, cy - 1.5, 1.2, 0, Math.PI * 2);
  ctx.fill();
}

export function renderScene(ctx: Ctx2D, view: SceneView, vp: Viewport): void {
  ctx.save();
  drawAreas(ctx, view, vp);
  drawStar(ctx, view, vp);
  drawPedestrians(ctx, view, vp);
  drawVehicles(ctx, view, vp);
  drawAvatar(ctx, view, vp);
  ctx.restore();
}
