// Wire protocol for the frame service: JSON control messages out,
// JSON replies and binary frames in.
//
// Frame layout: 16-byte little-endian header (magic "FVSF", u32 width,
// u32 height, u32 frame id) followed by row-major 8-bit RGBA.

export const FRAME_HEADER_BYTES = 16;
const MAGIC = [0x46, 0x56, 0x53, 0x46]; // "FVSF"

export interface DecodedFrame {
  width: number;
  height: number;
  frameId: number;
  rgba: Uint8ClampedArray;
}

/** Decode a binary frame; returns null for anything malformed. */
export function decodeFrame(buf: ArrayBuffer): DecodedFrame | null {
  if (buf.byteLength < FRAME_HEADER_BYTES) return null;
  const bytes = new Uint8Array(buf, 0, 4);
  for (let i = 0; i < 4; i++) {
    if (bytes[i] !== MAGIC[i]) return null;
  }
  const dv = new DataView(buf);
  const width = dv.getUint32(4, true);
  const height = dv.getUint32(8, true);
  const frameId = dv.getUint32(12, true);
  if (width === 0 || height === 0) return null;
  if (buf.byteLength !== FRAME_HEADER_BYTES + width * height * 4) return null;
  return {
    width,
    height,
    frameId,
    rgba: new Uint8ClampedArray(buf, FRAME_HEADER_BYTES),
  };
}

export type RenderMode = "foveated" | "full-GS" | "mask-debug";

export const setGaze = (u: number, v: number): string =>
  JSON.stringify({ type: "SetGaze", payload: { u, v } });

export const setMode = (mode: RenderMode): string =>
  JSON.stringify({ type: "SetMode", payload: { mode } });

export const setParam = (name: "m" | "gamma_edge" | "fovea_px", value: number): string =>
  JSON.stringify({ type: "SetParam", payload: { name, value } });

export const setCamera = (r: number[][], t: number[]): string =>
  JSON.stringify({ type: "SetCamera", payload: { pose: { r, t } } });

export const requestFrame = (): string => JSON.stringify({ type: "RenderFrame" });

export const requestStats = (): string => JSON.stringify({ type: "Stats" });

export interface StatsPayload {
  frame_id: number;
  mode: string;
  camera?: { r: number[][]; t: number[]; width: number; height: number };
  [stage: string]: unknown;
}

export interface ServerReply {
  type: "ack" | "stats" | "error" | "framelog";
  [key: string]: unknown;
}

export function parseReply(text: string): ServerReply | null {
  try {
    const msg = JSON.parse(text);
    return typeof msg === "object" && msg !== null && typeof msg.type === "string"
      ? (msg as ServerReply)
      : null;
  } catch {
    return null;
  }
}

/** Centroid of full-intensity pixels in a mask-debug frame (mask value 255). */
export function maskDiskCenter(frame: DecodedFrame): { u: number; v: number } | null {
  let sx = 0;
  let sy = 0;
  let n = 0;
  for (let y = 0; y < frame.height; y++) {
    for (let x = 0; x < frame.width; x++) {
      if (frame.rgba[(y * frame.width + x) * 4] === 255) {
        sx += x + 0.5;
        sy += y + 0.5;
        n++;
      }
    }
  }
  return n === 0 ? null : { u: sx / n, v: sy / n };
}
