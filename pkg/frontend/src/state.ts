// Viewer-side session state: frame ordering, drop accounting, gaze throttle.

import { DecodedFrame, RenderMode } from "./protocol.js";

export type ConnectionStatus = "connecting" | "connected" | "disconnected";

export interface OverlayToggles {
  foveaRing: boolean;
  maskHeatmap: boolean;
  timings: boolean;
}

export class ViewerState {
  status: ConnectionStatus = "connecting";
  mode: RenderMode = "foveated";
  displayedFrameId = 0; // invariant: non-decreasing
  droppedFrames = 0;
  overlays: OverlayToggles = { foveaRing: true, maskHeatmap: false, timings: true };
  stats: Record<string, number> = {};
  gaze: { u: number; v: number } = { u: 0, v: 0 };

  /**
   * Account for an incoming binary frame. Returns the frame when it should
   * be displayed; malformed or stale frames increment the drop counter so
   * no frame is ever silently lost.
   */
  acceptFrame(frame: DecodedFrame | null): DecodedFrame | null {
    if (frame === null || frame.frameId < this.displayedFrameId) {
      this.droppedFrames++;
      return null;
    }
    this.displayedFrameId = frame.frameId;
    return frame;
  }

  toggleMode(): RenderMode {
    this.mode = this.mode === "foveated" ? "full-GS" : "foveated";
    return this.mode;
  }
}

/**
 * Rate limiter for gaze messages: at most maxHz sends per second no matter
 * how fast pointer events arrive. The newest position is kept so a
 * trailing flush() never sends stale coordinates.
 */
export class GazeThrottle {
  private readonly intervalMs: number;
  private lastSent = -Infinity;
  private pending: { u: number; v: number } | null = null;

  constructor(maxHz = 120) {
    this.intervalMs = 1000 / maxHz;
  }

  /** Offer a new position; returns it if a send is due now, else buffers. */
  offer(u: number, v: number, nowMs: number): { u: number; v: number } | null {
    this.pending = { u, v };
    return this.flush(nowMs);
  }

  /** Send the buffered position if the rate budget allows. */
  flush(nowMs: number): { u: number; v: number } | null {
    if (this.pending === null || nowMs - this.lastSent < this.intervalMs) {
      return null;
    }
    const out = this.pending;
    this.pending = null;
    this.lastSent = nowMs;
    return out;
  }
}

/** Simple first-person camera mirror: row-major rotation plus translation. */
export class CameraPose {
  r: number[][] = [
    [1, 0, 0],
    [0, 1, 0],
    [0, 0, 1],
  ];
  t: number[] = [0, 0, 0];

  setFrom(r: number[][], t: number[]): void {
    this.r = r.map((row) => [...row]);
    this.t = [...t];
  }

  /** World-space camera center c = -R^T t. */
  center(): number[] {
    const { r, t } = this;
    return [0, 1, 2].map(
      (i) => -(r[0][i] * t[0] + r[1][i] * t[1] + r[2][i] * t[2]),
    );
  }

  /** Move along the camera's local axis (0=x right, 1=y down, 2=z forward). */
  translate(axis: number, amount: number): void {
    const c = this.center();
    const dir = this.r[axis]; // row i of R = camera axis i in world coords
    const nc = c.map((v, i) => v + amount * dir[i]);
    this.t = [0, 1, 2].map(
      (i) => -(this.r[i][0] * nc[0] + this.r[i][1] * nc[1] + this.r[i][2] * nc[2]),
    );
  }

  /** Yaw (about world y) then pitch (about camera x), preserving the center. */
  rotate(yaw: number, pitch: number): void {
    const c = this.center();
    const ry = [
      [Math.cos(yaw), 0, Math.sin(yaw)],
      [0, 1, 0],
      [-Math.sin(yaw), 0, Math.cos(yaw)],
    ];
    const rx = [
      [1, 0, 0],
      [0, Math.cos(pitch), -Math.sin(pitch)],
      [0, Math.sin(pitch), Math.cos(pitch)],
    ];
    this.r = matmul(rx, matmul(this.r, ry));
    this.t = [0, 1, 2].map(
      (i) => -(this.r[i][0] * c[0] + this.r[i][1] * c[1] + this.r[i][2] * c[2]),
    );
  }
}

function matmul(a: number[][], b: number[][]): number[][] {
  return a.map((row, i) =>
    [0, 1, 2].map((j) => row[0] * b[0][j] + row[1] * b[1][j] + row[2] * b[2][j]),
  );
}
