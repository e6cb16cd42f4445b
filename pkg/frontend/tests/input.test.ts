import { describe, expect, it } from "vitest";

import { DEFAULT_INPUT, gamepadVelocity, InputState } from "../src/input.js";

const norm = (v: number[]) => Math.hypot(v[0]!, v[1]!, v[2]!);

describe("InputState", () => {
  it("maps forward key to +x at max speed", () => {
    const s = new InputState();
    s.keyDown("KeyW");
    expect(s.velocity()).toEqual([DEFAULT_INPUT.maxSpeed, 0, 0]);
  });

  it("clamps diagonal combinations to max speed", () => {
    const s = new InputState();
    s.keyDown("KeyW");
    s.keyDown("KeyA");
    s.keyDown("KeyR");
    expect(norm(s.velocity())).toBeCloseTo(DEFAULT_INPUT.maxSpeed, 9);
  });

  it("key release zeroes the next poll", () => {
    const s = new InputState();
    s.keyDown("KeyW");
    expect(norm(s.velocity())).toBeGreaterThan(0);
    s.keyUp("KeyW");
    expect(s.velocity()).toEqual([0, 0, 0]);
  });

  it("escape clears everything held", () => {
    const s = new InputState();
    s.keyDown("KeyW");
    s.keyDown("KeyD");
    s.keyDown("Escape");
    expect(s.velocity()).toEqual([0, 0, 0]);
  });

  it("shift slows without changing direction", () => {
    const s = new InputState();
    s.keyDown("KeyW");
    s.keyDown("ShiftLeft");
    const slow = s.velocity();
    expect(slow[0]).toBeCloseTo(
      DEFAULT_INPUT.maxSpeed * DEFAULT_INPUT.slowFactor, 9,
    );
    s.keyUp("ShiftLeft");
    expect(s.velocity()[0]).toBeCloseTo(DEFAULT_INPUT.maxSpeed, 9);
  });

  it("opposing keys cancel", () => {
    const s = new InputState();
    s.keyDown("KeyW");
    s.keyDown("KeyS");
    expect(s.velocity()).toEqual([0, 0, 0]);
  });

  it("never exceeds the configured max speed", () => {
    const keys = ["KeyW", "KeyS", "KeyA", "KeyD", "KeyR", "KeyF"];
    for (let mask = 1; mask < 1 << keys.length; mask++) {
      const s = new InputState();
      keys.forEach((k, i) => { if (mask & (1 << i)) s.keyDown(k); });
      expect(norm(s.velocity())).toBeLessThanOrEqual(DEFAULT_INPUT.maxSpeed + 1e-9);
    }
  });
});

describe("gamepadVelocity", () => {
  it("applies deadzone", () => {
    expect(gamepadVelocity({ axes: [0.05, -0.1, 0, 0.02] })).toEqual([0, 0, 0]);
  });

  it("maps sticks to body axes and clamps", () => {
    const v = gamepadVelocity({ axes: [0, -1, 0, 0] });
    expect(v[0]).toBeCloseTo(DEFAULT_INPUT.maxSpeed, 9); // stick up = forward
    const diag = gamepadVelocity({ axes: [-1, -1, 0, -1] });
    expect(norm(diag)).toBeLessThanOrEqual(DEFAULT_INPUT.maxSpeed + 1e-9);
  });
});
