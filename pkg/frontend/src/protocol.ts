// Wire types for the teleop session socket (see docs/protocol.md).
// Parsing is defensive: a frame that does not validate is rejected with a
// reason instead of leaking half-formed objects into the view model.

export const PROTOCOL_VERSION = 1;

export type Vec3 = [number, number, number];

export interface GeometryInfo {
  width: number;
  height: number;
  theta_min: number;
  theta_max: number;
}

export type ScenePrimitive =
  | { type: "box"; center: Vec3; size: Vec3 }
  | { type: "sphere"; center: Vec3; radius: number }
  | { type: "ground"; height: number };

export interface HelloMsg {
  type: "hello";
  v: number;
  scenario: string;
  geometry: GeometryInfo;
  params: Record<string, number>;
  scene: ScenePrimitive[];
  bounds: [Vec3, Vec3];
  uav_radius: number;
  max_speed: number;
}

export interface TraceStep {
  t: number;
  p: Vec3;
  d_near: number | null;
}

export interface TraceInfo {
  stop_reason: "horizon_reached" | "safety_breach" | "already_inside";
  t_stop: number;
  steps: TraceStep[];
}

export interface RangeStrip {
  width: number;
  height: number;
  stride: number;
  theta_min: number;
  theta_max: number;
  data: number[];
}

export interface StateMsg {
  type: "state";
  v: number;
  tick: number;
  t: number;
  position: Vec3;
  velocity: Vec3;
  target: Vec3;
  command: Vec3;
  regime: "free" | "blend" | "override" | null;
  d_near: number | null;
  trace: TraceInfo | null;
  range?: RangeStrip;
  collided: boolean;
  paused: boolean;
  speed: number;
}

export interface ErrorMsg {
  type: "error";
  v: number;
  message: string;
}

export type ServerMsg = HelloMsg | StateMsg | ErrorMsg;

export interface CommandFrame {
  type: "command";
  v: number;
  velocity: Vec3;
  stamp: number;
}

export interface ControlFrame {
  type: "control";
  v: number;
  action: "pause" | "resume" | "reset" | "speed" | "load";
  multiplier?: number;
  name?: string;
}

const isFiniteNumber = (x: unknown): x is number =>
  typeof x === "number" && Number.isFinite(x);

export function isVec3(x: unknown): x is Vec3 {
  return Array.isArray(x) && x.length === 3 && x.every(isFiniteNumber);
}

export type ParseResult =
  | { ok: true; msg: ServerMsg }
  | { ok: false; reason: string };

export function parseServerMessage(raw: string): ParseResult {
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch {
    return { ok: false, reason: "not valid JSON" };
  }
  if (typeof data !== "object" || data === null) {
    return { ok: false, reason: "frame is not an object" };
  }
  const msg = data as Record<string, unknown>;
  if (msg.v !== PROTOCOL_VERSION) {
    return { ok: false, reason: `unsupported protocol version ${msg.v}` };
  }
  switch (msg.type) {
    case "hello": {
      if (typeof msg.scenario !== "string" || !Array.isArray(msg.scene)) {
        return { ok: false, reason: "malformed hello frame" };
      }
      return { ok: true, msg: msg as unknown as HelloMsg };
    }
    case "state": {
      if (
        !isFiniteNumber(msg.tick) ||
        !isVec3(msg.position) ||
        !isVec3(msg.velocity) ||
        !isVec3(msg.target) ||
        !isVec3(msg.command)
      ) {
        return { ok: false, reason: "malformed state frame" };
      }
      return { ok: true, msg: msg as unknown as StateMsg };
    }
    case "error": {
      if (typeof msg.message !== "string") {
        return { ok: false, reason: "malformed error frame" };
      }
      return { ok: true, msg: msg as unknown as ErrorMsg };
    }
    default:
      return { ok: false, reason: `unknown frame type ${String(msg.type)}` };
  }
}

// Command frames must always be well-formed: finite components only, and
// the stamp is wall-clock milliseconds for server-side staleness checks.
export function makeCommandFrame(velocity: Vec3, now = Date.now()): CommandFrame {
  if (!isVec3(velocity)) {
    throw new Error("command velocity must be three finite numbers");
  }
  return { type: "command", v: PROTOCOL_VERSION, velocity, stamp: now };
}

export function makeControlFrame(
  action: ControlFrame["action"],
  extra: { multiplier?: number; name?: string } = {},
): ControlFrame {
  return { type: "control", v: PROTOCOL_VERSION, action, ...extra };
}
