// The render-facing state: last hello + latest state frame + trail.
// Socket messages apply atomically; the rendered tick never moves
// backwards except across a scenario reset, which clears the trail.

import type { HelloMsg, StateMsg, Vec3 } from "./protocol.js";

export type Connection = "connecting" | "connected" | "lost";

export interface ViewModel {
  hello: HelloMsg | null;
  state: StateMsg | null;
  trail: Vec3[];
  connection: Connection;
  lastError: string | null;
  resets: number;
}

export const MAX_TRAIL = 2000;

export function initialViewModel(): ViewModel {
  return {
    hello: null,
    state: null,
    trail: [],
    connection: "connecting",
    lastError: null,
    resets: 0,
  };
}

export function applyHello(vm: ViewModel, msg: HelloMsg): ViewModel {
  return {
    ...vm,
    hello: msg,
    state: null,
    trail: [],
    connection: "connected",
    lastError: null,
  };
}

export function applyState(vm: ViewModel, msg: StateMsg): ViewModel {
  // The transport is ordered, so a lower tick only happens on a scenario
  // reset or reload; drop the stale trail in that case.
  const reset = vm.state !== null && msg.tick < vm.state.tick;
  const trail = reset ? [] : vm.trail.slice();
  if (msg.tick > 0) {
    trail.push(msg.position);
    if (trail.length > MAX_TRAIL) trail.splice(0, trail.length - MAX_TRAIL);
  }
  return {
    ...vm,
    state: msg,
    trail,
    connection: "connected",
    resets: vm.resets + (reset ? 1 : 0),
  };
}

export function applyError(vm: ViewModel, message: string): ViewModel {
  return { ...vm, lastError: message };
}

export function applyDisconnect(vm: ViewModel): ViewModel {
  return { ...vm, connection: "lost" };
}

export function renderedTick(vm: ViewModel): number {
  return vm.state ? vm.state.tick : 0;
}
