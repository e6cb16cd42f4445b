import { describe, expect, it } from "vitest";

import type { HelloMsg, StateMsg } from "../src/protocol.js";
import {
  applyDisconnect,
  applyError,
  applyHello,
  applyState,
  initialViewModel,
  renderedTick,
} from "../src/viewmodel.js";

const HELLO: HelloMsg = {
  type: "hello", v: 1, scenario: "gap",
  geometry: { width: 512, height: 128, theta_min: -0.78, theta_max: 0.78 },
  params: {}, scene: [], bounds: [[-10, -10, 0], [10, 10, 10]],
  uav_radius: 0.3, max_speed: 3,
};

function state(tick: number, x = 0): StateMsg {
  return {
    type: "state", v: 1, tick, t: tick * 0.05,
    position: [x, 0, 2], velocity: [0, 0, 0], target: [0, 0, 0],
    command: [0, 0, 0], regime: "free", d_near: 5, trace: null,
    collided: false, paused: false, speed: 1,
  };
}

describe("view model", () => {
  it("hello resets state and connects", () => {
    let vm = applyDisconnect(initialViewModel());
    vm = applyHello(vm, HELLO);
    expect(vm.connection).toBe("connected");
    expect(vm.hello?.scenario).toBe("gap");
    expect(vm.state).toBeNull();
  });

  it("rendered tick is monotone over an ordered stream", () => {
    let vm = applyHello(initialViewModel(), HELLO);
    let last = renderedTick(vm);
    for (let k = 1; k <= 50; k++) {
      vm = applyState(vm, state(k, k * 0.1));
      expect(renderedTick(vm)).toBeGreaterThanOrEqual(last);
      last = renderedTick(vm);
    }
    expect(vm.trail.length).toBe(50);
  });

  it("a tick drop is a scenario reset: trail clears, epoch counts", () => {
    let vm = applyHello(initialViewModel(), HELLO);
    vm = applyState(vm, state(40));
    vm = applyState(vm, state(41));
    expect(vm.trail.length).toBe(2);
    vm = applyState(vm, state(1)); // reset restarts the counter
    expect(vm.resets).toBe(1);
    expect(vm.trail.length).toBe(1);
    expect(renderedTick(vm)).toBe(1);
  });

  it("trail is bounded", () => {
    let vm = applyHello(initialViewModel(), HELLO);
    for (let k = 1; k <= 2600; k++) vm = applyState(vm, state(k));
    expect(vm.trail.length).toBeLessThanOrEqual(2000);
  });

  it("errors and disconnects are recorded without touching state", () => {
    let vm = applyHello(initialViewModel(), HELLO);
    vm = applyState(vm, state(5));
    vm = applyError(vm, "bad frame");
    expect(vm.lastError).toBe("bad frame");
    expect(renderedTick(vm)).toBe(5);
    vm = applyDisconnect(vm);
    expect(vm.connection).toBe("lost");
    expect(renderedTick(vm)).toBe(5); // frozen frame survives
  });
});
