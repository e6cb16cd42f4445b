// Keyboard (and optional gamepad) state to body-frame velocity targets.
// Body frame: x forward, y left, z up. One poll produces one command, so
// releasing every key yields a zero frame on the next poll.

import type { Vec3 } from "./protocol.js";

export interface InputConfig {
  maxSpeed: number;
  slowFactor: number; // applied while Shift is held
}

export const DEFAULT_INPUT: InputConfig = { maxSpeed: 3.0, slowFactor: 0.35 };

const KEY_AXES: Record<string, Vec3> = {
  KeyW: [1, 0, 0],
  KeyS: [-1, 0, 0],
  KeyA: [0, 1, 0],
  KeyD: [0, -1, 0],
  KeyR: [0, 0, 1],
  KeyF: [0, 0, -1],
};

export class InputState {
  private held = new Set<string>();
  private shift = false;

  keyDown(code: string): void {
    if (code in KEY_AXES) this.held.add(code);
    if (code === "ShiftLeft" || code === "ShiftRight") this.shift = true;
    if (code === "Escape") this.held.clear();
  }

  keyUp(code: string): void {
    this.held.delete(code);
    if (code === "ShiftLeft" || code === "ShiftRight") this.shift = false;
  }

  clear(): void {
    this.held.clear();
    this.shift = false;
  }

  get anyHeld(): boolean {
    return this.held.size > 0;
  }

  // Sum held axes, clamp the norm to maxSpeed (diagonals must not exceed it).
  velocity(cfg: InputConfig = DEFAULT_INPUT): Vec3 {
    let x = 0;
    let y = 0;
    let z = 0;
    for (const code of this.held) {
      const axis = KEY_AXES[code];
      if (!axis) continue;
      x += axis[0];
      y += axis[1];
      z += axis[2];
    }
    const norm = Math.hypot(x, y, z);
    if (norm === 0) return [0, 0, 0];
    let speed = cfg.maxSpeed * (this.shift ? cfg.slowFactor : 1);
    const k = speed / norm;
    return [x * k, y * k, z * k];
  }
}

export interface GamepadLike {
  axes: ReadonlyArray<number>;
}

// Left stick: forward/lateral; right stick vertical: altitude.
export function gamepadVelocity(
  pad: GamepadLike,
  cfg: InputConfig = DEFAULT_INPUT,
  deadzone = 0.15,
): Vec3 {
  const dz = (v: number) => (Math.abs(v) < deadzone ? 0 : v);
  const x = -dz(pad.axes[1] ?? 0);
  const y = -dz(pad.axes[0] ?? 0);
  const z = -dz(pad.axes[3] ?? 0);
  const norm = Math.hypot(x, y, z);
  if (norm === 0) return [0, 0, 0];
  const k = (Math.min(norm, 1) * cfg.maxSpeed) / norm;
  return [x * k, y * k, z * k];
}
