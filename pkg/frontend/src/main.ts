// Entry point: bind socket, input polling and the render loop.

import { SessionClient } from "./client.js";
import { DEFAULT_INPUT, gamepadVelocity, InputState, type InputConfig } from "./input.js";
import { makeControlFrame, type ServerMsg, type Vec3 } from "./protocol.js";
import { drawRangeStrip, drawScene, hudFor, type Ctx2D } from "./render.js";
import {
  applyDisconnect,
  applyError,
  applyHello,
  applyState,
  initialViewModel,
} from "./viewmodel.js";

const INPUT_POLL_MS = 50;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function main(): void {
  const sceneCanvas = el<HTMLCanvasElement>("scene");
  const stripCanvas = el<HTMLCanvasElement>("range-strip");
  const regimeBadge = el<HTMLSpanElement>("regime");
  const dNearLabel = el<HTMLSpanElement>("d-near");
  const speedLabel = el<HTMLSpanElement>("speed");
  const bannerBox = el<HTMLDivElement>("banner");

  let vm = initialViewModel();
  const input = new InputState();
  let inputCfg: InputConfig = { ...DEFAULT_INPUT };

  const proto = location.protocol === "https:" ? "wss" : "ws";
  const client = new SessionClient(`${proto}://${location.host}/session`, {
    onMessage(msg: ServerMsg) {
      if (msg.type === "hello") {
        vm = applyHello(vm, msg);
        inputCfg = { ...inputCfg, maxSpeed: msg.max_speed };
      } else if (msg.type === "state") {
        vm = applyState(vm, msg);
      } else {
        vm = applyError(vm, msg.message);
        console.warn("server rejected a frame:", msg.message);
      }
    },
    onDisconnect() {
      vm = applyDisconnect(vm);
    },
  });
  client.connect();

  window.addEventListener("keydown", (ev) => {
    if (ev.repeat) return;
    input.keyDown(ev.code);
    if (ev.code === "Space") client.sendRaw(makeControlFrame("pause"));
    if (ev.code === "Enter") client.sendRaw(makeControlFrame("resume"));
    if (ev.code === "Backspace") client.sendRaw(makeControlFrame("reset"));
  });
  window.addEventListener("keyup", (ev) => input.keyUp(ev.code));
  window.addEventListener("blur", () => input.clear());

  // one command per poll: holding keys streams, releasing them streams zeros
  setInterval(() => {
    let v: Vec3 = input.velocity(inputCfg);
    const pads = navigator.getGamepads?.() ?? [];
    const pad = pads.find((p) => p != null);
    if (pad && !input.anyHeld) {
      const gv = gamepadVelocity(pad, inputCfg);
      if (Math.hypot(...gv) > 0) v = gv;
    }
    client.sendCommand(v);
  }, INPUT_POLL_MS);

  const sceneCtx = sceneCanvas.getContext("2d") as unknown as Ctx2D;
  const stripCtx = stripCanvas.getContext("2d")!;

  function renderFrame(): void {
    drawScene(sceneCtx, vm);

    const strip = vm.state?.range;
    if (strip) {
      if (stripCanvas.width !== strip.width || stripCanvas.height !== strip.height) {
        stripCanvas.width = strip.width;
        stripCanvas.height = strip.height;
      }
      const img = stripCtx.createImageData(strip.width, strip.height);
      drawRangeStrip(sceneCtx, strip, (x, y, [r, g, b]) => {
        const o = (y * strip.width + x) * 4;
        img.data[o] = r;
        img.data[o + 1] = g;
        img.data[o + 2] = b;
        img.data[o + 3] = 255;
      });
      stripCtx.putImageData(img, 0, 0);
    }

    const hud = hudFor(vm);
    regimeBadge.textContent = hud.regime;
    regimeBadge.style.background = hud.regimeColor;
    dNearLabel.textContent = hud.dNear;
    speedLabel.textContent = hud.speed;
    bannerBox.textContent = hud.banner ?? "";
    bannerBox.style.display = hud.banner ? "block" : "none";

    requestAnimationFrame(renderFrame);
  }
  requestAnimationFrame(renderFrame);
}

main();
