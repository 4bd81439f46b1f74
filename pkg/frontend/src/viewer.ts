// Browser client: canvas blit of streamed frames, mouse-as-gaze input,
// keyboard camera, overlay drawing, auto-reconnect.

import {
  DecodedFrame,
  decodeFrame,
  parseReply,
  requestFrame,
  requestStats,
  setCamera,
  setGaze,
  setMode,
  setParam,
  StatsPayload,
} from "./protocol.js";
import { CameraPose, GazeThrottle, ViewerState } from "./state.js";

const MOVE_STEP = 0.06;
const TURN_STEP = 0.004;
const RETRY_MS = 1500;

export class Viewer {
  readonly state = new ViewerState();
  private readonly throttle = new GazeThrottle(120);
  private readonly pose = new CameraPose();
  private ws: WebSocket | null = null;
  private ctx: CanvasRenderingContext2D;
  private frameInFlight = false;
  private dragging = false;
  private lastPointer: [number, number] | null = null;
  private foveaPx = 64;

  constructor(
    private readonly url: string,
    private readonly canvas: HTMLCanvasElement,
    private readonly banner: HTMLElement,
    private readonly hud: HTMLElement,
  ) {
    const ctx = canvas.getContext("2d");
    if (!ctx) throw new Error("2d canvas context unavailable");
    this.ctx = ctx;
    this.bindInput();
    this.connect();
    setInterval(() => this.pump(), 8); // trailing gaze flush + frame pacing
  }

  private connect(): void {
    this.state.status = "connecting";
    this.showBanner("connecting…");
    const ws = new WebSocket(this.url);
    ws.binaryType = "arraybuffer";
    ws.onopen = () => {
      this.state.status = "connected";
      this.showBanner(null);
      ws.send(requestStats()); // fetch camera + mode, then start the loop
    };
    ws.onmessage = (ev) => this.onMessage(ev.data);
    ws.onclose = () => {
      this.state.status = "disconnected";
      this.frameInFlight = false;
      this.showBanner(`disconnected — retrying in ${RETRY_MS / 1000}s`);
      setTimeout(() => this.connect(), RETRY_MS);
    };
    ws.onerror = () => ws.close();
    this.ws = ws;
  }

  private onMessage(data: ArrayBuffer | string): void {
    if (typeof data === "string") {
      const reply = parseReply(data);
      if (reply === null) return;
      if (reply.type === "stats") {
        const p = reply.payload as StatsPayload;
        if (p.camera) {
          this.pose.setFrom(p.camera.r, p.camera.t);
          this.canvas.width = p.camera.width;
          this.canvas.height = p.camera.height;
        }
        for (const [k, v] of Object.entries(p)) {
          if (typeof v === "number") this.state.stats[k] = v;
        }
        this.requestNextFrame();
      } else if (reply.type === "error") {
        console.warn("service error:", reply.message);
      }
      return;
    }
    this.frameInFlight = false;
    const frame = this.state.acceptFrame(decodeFrame(data));
    if (frame !== null) this.draw(frame);
    this.requestNextFrame();
  }

  private requestNextFrame(): void {
    if (this.ws?.readyState === WebSocket.OPEN && !this.frameInFlight) {
      this.frameInFlight = true;
      this.ws.send(requestFrame());
    }
  }

  private pump(): void {
    if (this.ws?.readyState !== WebSocket.OPEN) return;
    const gaze = this.throttle.flush(performance.now());
    if (gaze !== null) this.ws.send(setGaze(gaze.u, gaze.v));
  }

  private draw(frame: DecodedFrame): void {
    this.ctx.putImageData(
      new ImageData(new Uint8ClampedArray(frame.rgba), frame.width, frame.height),
      0, 0);
    if (this.state.overlays.foveaRing) {
      this.ctx.strokeStyle = "rgba(0, 255, 128, 0.8)";
      this.ctx.lineWidth = 1.5;
      this.ctx.beginPath();
      this.ctx.arc(this.state.gaze.u, this.state.gaze.v, this.foveaPx, 0, 2 * Math.PI);
      this.ctx.stroke();
    }
    const lines = [
      `frame ${frame.frameId}  mode ${this.state.mode}  drops ${this.state.droppedFrames}`,
    ];
    if (this.state.overlays.timings) {
      const t = this.state.stats;
      const stages = ["periphery_ms", "fovea_points_ms", "resolver_ms",
                      "combine_ms", "tonemap_ms", "total_ms"]
        .filter((k) => k in t)
        .map((k) => `${k.replace("_ms", "")} ${(t[k] as number).toFixed(1)}`);
      if (stages.length) lines.push(stages.join("  "));
    }
    this.hud.textContent = lines.join("\n");
  }

  private sendPose(): void {
    this.ws?.send(setCamera(this.pose.r, this.pose.t));
  }

  private bindInput(): void {
    this.canvas.addEventListener("pointermove", (ev) => {
      const rect = this.canvas.getBoundingClientRect();
      const u = ((ev.clientX - rect.left) / rect.width) * this.canvas.width;
      const v = ((ev.clientY - rect.top) / rect.height) * this.canvas.height;
      if (this.dragging && this.lastPointer) {
        this.pose.rotate((ev.clientX - this.lastPointer[0]) * TURN_STEP,
                         (ev.clientY - this.lastPointer[1]) * TURN_STEP);
        this.sendPose();
      } else {
        this.state.gaze = { u, v };
        const send = this.throttle.offer(u, v, performance.now());
        if (send !== null && this.ws?.readyState === WebSocket.OPEN) {
          this.ws.send(setGaze(send.u, send.v));
        }
      }
      this.lastPointer = [ev.clientX, ev.clientY];
    });
    this.canvas.addEventListener("pointerdown", () => (this.dragging = true));
    window.addEventListener("pointerup", () => (this.dragging = false));

    window.addEventListener("keydown", (ev) => {
      const ws = this.ws;
      if (!ws || ws.readyState !== WebSocket.OPEN) return;
      switch (ev.key) {
        case " ": // user-study style toggle
          ev.preventDefault();
          ws.send(setMode(this.state.toggleMode()));
          ws.send(requestStats());
          break;
        case "m":
          this.state.mode = this.state.mode === "mask-debug" ? "foveated" : "mask-debug";
          this.state.overlays.maskHeatmap = this.state.mode === "mask-debug";
          ws.send(setMode(this.state.mode));
          break;
        case "o":
          this.state.overlays.foveaRing = !this.state.overlays.foveaRing;
          break;
        case "t":
          this.state.overlays.timings = !this.state.overlays.timings;
          break;
        case "w": this.pose.translate(2, MOVE_STEP); this.sendPose(); break;
        case "s": this.pose.translate(2, -MOVE_STEP); this.sendPose(); break;
        case "a": this.pose.translate(0, -MOVE_STEP); this.sendPose(); break;
        case "d": this.pose.translate(0, MOVE_STEP); this.sendPose(); break;
        case "[": this.foveaPx = Math.max(16, this.foveaPx / 2);
          ws.send(setParam("fovea_px", this.foveaPx * 2)); break;
        case "]": this.foveaPx = Math.min(256, this.foveaPx * 2);
          ws.send(setParam("fovea_px", this.foveaPx * 2)); break;
      }
    });
  }

  private showBanner(text: string | null): void {
    this.banner.style.display = text === null ? "none" : "block";
    if (text !== null) this.banner.textContent = text;
  }
}
