// WebSocket wiring with automatic reconnect and a last-writer-wins
// outgoing command slot.

import { makeCommandFrame, parseServerMessage, type ServerMsg, type Vec3 } from "./protocol.js";

export interface ClientHooks {
  onMessage(msg: ServerMsg): void;
  onDisconnect(): void;
  onReject?(reason: string): void;
}

export class SessionClient {
  private ws: WebSocket | null = null;
  private closed = false;
  private retryMs = 500;

  constructor(private url: string, private hooks: ClientHooks) {}

  connect(): void {
    if (this.closed) return;
    const ws = new WebSocket(this.url);
    this.ws = ws;
    ws.onmessage = (ev: MessageEvent) => {
      const parsed = parseServerMessage(String(ev.data));
      if (parsed.ok) {
        this.retryMs = 500;
        this.hooks.onMessage(parsed.msg);
      } else {
        this.hooks.onReject?.(parsed.reason);
      }
    };
    ws.onclose = () => {
      this.ws = null;
      this.hooks.onDisconnect();
      if (!this.closed) {
        setTimeout(() => this.connect(), this.retryMs);
        this.retryMs = Math.min(this.retryMs * 2, 5000);
      }
    };
    ws.onerror = () => ws.close();
  }

  get connected(): boolean {
    return this.ws !== null && this.ws.readyState === WebSocket.OPEN;
  }

  sendCommand(velocity: Vec3): void {
    if (!this.connected) return;
    this.ws!.send(JSON.stringify(makeCommandFrame(velocity)));
  }

  sendRaw(frame: object): void {
    if (!this.connected) return;
    this.ws!.send(JSON.stringify(frame));
  }

  close(): void {
    this.closed = true;
    this.ws?.close();
  }
}
