// Canvas drawing: top-down scene view plus the range-image strip.
// Only the 2D-context subset used here is required, so tests can pass a
// recording stub instead of a real canvas.

import type { RangeStrip, StateMsg, Vec3 } from "./protocol.js";
import type { ViewModel } from "./viewmodel.js";

export interface Ctx2D {
  canvas: { width: number; height: number };
  fillStyle: string | CanvasGradient | CanvasPattern;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  font: string;
  globalAlpha: number;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  rect(x: number, y: number, w: number, h: number): void;
  stroke(): void;
  fill(): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  strokeRect(x: number, y: number, w: number, h: number): void;
  fillText(text: string, x: number, y: number): void;
  clearRect(x: number, y: number, w: number, h: number): void;
}

export interface Camera {
  cx: number; // world center
  cy: number;
  scale: number; // px per meter
}

export const ARROW_VISIBLE_RAD = 0.05;

export function fitCamera(
  bounds: [Vec3, Vec3], width: number, height: number, margin = 20,
): Camera {
  const [lo, hi] = bounds;
  const spanX = Math.max(hi[0] - lo[0], 1);
  const spanY = Math.max(hi[1] - lo[1], 1);
  const scale = Math.min(
    (width - 2 * margin) / spanX,
    (height - 2 * margin) / spanY,
  );
  return { cx: (lo[0] + hi[0]) / 2, cy: (lo[1] + hi[1]) / 2, scale };
}

// World x is up on screen, world y is left: a top-down map with the
// vehicle flying "up" when commanded forward.
export function worldToScreen(
  cam: Camera, wx: number, wy: number, width: number, height: number,
): [number, number] {
  const sx = width / 2 - (wy - cam.cy) * cam.scale;
  const sy = height / 2 - (wx - cam.cx) * cam.scale;
  return [sx, sy];
}

function arrow(
  ctx: Ctx2D, cam: Camera, from: Vec3, vec: Vec3, lengthScale: number,
  color: string, width: number, height: number,
): void {
  const mag = Math.hypot(vec[0], vec[1]);
  if (mag < 1e-3) return;
  const [x0, y0] = worldToScreen(cam, from[0], from[1], width, height);
  const [x1, y1] = worldToScreen(
    cam, from[0] + vec[0] * lengthScale, from[1] + vec[1] * lengthScale,
    width, height,
  );
  ctx.strokeStyle = color;
  ctx.fillStyle = color;
  ctx.lineWidth = 2;
  ctx.beginPath();
  ctx.moveTo(x0, y0);
  ctx.lineTo(x1, y1);
  ctx.stroke();
  const angle = Math.atan2(y1 - y0, x1 - x0);
  const tip = 6;
  ctx.beginPath();
  ctx.moveTo(x1, y1);
  ctx.lineTo(x1 - tip * Math.cos(angle - 0.5), y1 - tip * Math.sin(angle - 0.5));
  ctx.lineTo(x1 - tip * Math.cos(angle + 0.5), y1 - tip * Math.sin(angle + 0.5));
  ctx.fill();
}

export function drawScene(ctx: Ctx2D, vm: ViewModel): void {
  const w = ctx.canvas.width;
  const h = ctx.canvas.height;
  ctx.fillStyle = "#10141a";
  ctx.fillRect(0, 0, w, h);
  if (!vm.hello) return;
  const cam = fitCamera(vm.hello.bounds, w, h);

  ctx.strokeStyle = "#2c3440";
  ctx.lineWidth = 1;
  for (const prim of vm.hello.scene) {
    if (prim.type === "box") {
      const [sx, sy] = worldToScreen(
        cam, prim.center[0] + prim.size[0] / 2, prim.center[1] + prim.size[1] / 2, w, h,
      );
      ctx.fillStyle = "#3a4759";
      ctx.fillRect(sx, sy, prim.size[1] * cam.scale, prim.size[0] * cam.scale);
    } else if (prim.type === "sphere") {
      const [sx, sy] = worldToScreen(cam, prim.center[0], prim.center[1], w, h);
      ctx.fillStyle = "#3a4759";
      ctx.beginPath();
      ctx.arc(sx, sy, Math.max(prim.radius * cam.scale, 1.5), 0, Math.PI * 2);
      ctx.fill();
    }
    // ground planes have no top-down footprint
  }

  if (vm.trail.length > 1) {
    ctx.strokeStyle = "#5e6b7d";
    ctx.lineWidth = 1;
    ctx.beginPath();
    const first = vm.trail[0]!;
    const [fx, fy] = worldToScreen(cam, first[0], first[1], w, h);
    ctx.moveTo(fx, fy);
    for (const p of vm.trail) {
      const [sx, sy] = worldToScreen(cam, p[0], p[1], w, h);
      ctx.lineTo(sx, sy);
    }
    ctx.stroke();
  }

  const st = vm.state;
  if (!st) return;

  // predicted path, already truncated server-side at t_stop
  if (st.trace && st.trace.steps.length > 0) {
    ctx.strokeStyle = "#e8a33d";
    ctx.lineWidth = 2;
    ctx.beginPath();
    const [ux, uy] = worldToScreen(cam, st.position[0], st.position[1], w, h);
    ctx.moveTo(ux, uy);
    for (const step of st.trace.steps) {
      const [sx, sy] = worldToScreen(
        cam, st.position[0] + step.p[0], st.position[1] + step.p[1], w, h,
      );
      ctx.lineTo(sx, sy);
    }
    ctx.stroke();
    if (st.trace.stop_reason === "safety_breach") {
      const last = st.trace.steps[st.trace.steps.length - 1]!;
      const [sx, sy] = worldToScreen(
        cam, st.position[0] + last.p[0], st.position[1] + last.p[1], w, h,
      );
      ctx.fillStyle = "#e8533d";
      ctx.beginPath();
      ctx.arc(sx, sy, 4, 0, Math.PI * 2);
      ctx.fill();
    }
  }

  // commanded (green) vs adjusted (red) velocity arrows
  arrow(ctx, cam, st.position, st.target, 1.2, "#4fcf68", w, h);
  arrow(ctx, cam, st.position, st.command, 1.2, "#e8533d", w, h);

  const [ux, uy] = worldToScreen(cam, st.position[0], st.position[1], w, h);
  ctx.fillStyle = st.collided ? "#ff3333" : "#dce3ec";
  ctx.beginPath();
  ctx.arc(ux, uy, 5, 0, Math.PI * 2);
  ctx.fill();
}

// Range heatmap: near returns hot, far cool, invalid black.
export function rangeColor(r: number, maxRange = 16): [number, number, number] {
  if (r <= 0) return [8, 10, 14];
  const t = Math.max(0, Math.min(1, 1 - r / maxRange));
  return [Math.round(40 + 215 * t), Math.round(60 * (1 - t) + 40 * t), Math.round(120 * (1 - t))];
}

export function drawRangeStrip(
  ctx: Ctx2D,
  strip: RangeStrip,
  putPixel: (x: number, y: number, rgb: [number, number, number]) => void,
): void {
  // rows are elevation (bottom row = theta_min); draw bottom-up
  for (let row = 0; row < strip.height; row++) {
    for (let col = 0; col < strip.width; col++) {
      const r = strip.data[row * strip.width + col] ?? 0;
      putPixel(col, strip.height - 1 - row, rangeColor(r));
    }
  }
}

export interface Hud {
  regime: string;
  regimeColor: string;
  dNear: string;
  speed: string;
  banner: string | null;
}

export function hudFor(vm: ViewModel): Hud {
  const st = vm.state;
  const regime = st?.regime ?? "-";
  const colors: Record<string, string> = {
    free: "#4fcf68",
    blend: "#e8a33d",
    override: "#e8533d",
  };
  let banner: string | null = null;
  if (vm.connection === "lost") banner = "connection lost - reconnecting";
  else if (st?.collided) banner = "collided - reset to continue";
  else if (st?.paused) banner = "paused";
  return {
    regime: regime.toUpperCase(),
    regimeColor: colors[regime] ?? "#8892a0",
    dNear: st?.d_near != null ? `${st.d_near.toFixed(2)} m` : "-",
    speed: st ? `${Math.hypot(...st.velocity).toFixed(2)} m/s` : "-",
    banner,
  };
}
