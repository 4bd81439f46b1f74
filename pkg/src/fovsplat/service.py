"""Localhost frame service: camera/gaze state in, composited frames out.

Transport is a WebSocket. Control messages are JSON objects {type, payload};
frames are binary: a 16-byte header (magic "FVSF", u32 width, u32 height,
u32 frame_id, little endian) followed by row-major 8-bit RGBA. One client
per session. The gaze applied to the foveal pass is re-read from session
state after the peripheral pass finishes (late latching), so it reflects
the newest SetGaze received while the periphery was rendering.
"""

from __future__ import annotations

import asyncio
import json
import struct
import threading
from dataclasses import dataclass, field

import numpy as np

from .composite import to_uint8
from .pipeline import PipelineOptions, render_frame
from .sceneio import SceneBundle, camera_from_dict

FRAME_MAGIC = b"FVSF"

_MODE_ALIASES = {"foveated": "foveated", "full-gs": "full-gs", "full-GS": "full-gs",
                 "mask-debug": "mask-debug"}
_PARAMS = ("m", "gamma_edge", "fovea_px")


def encode_frame(rgb01: np.ndarray, frame_id: int) -> bytes:
    h, w = rgb01.shape[:2]
    rgba = np.empty((h, w, 4), dtype=np.uint8)
    rgba[:, :, :3] = to_uint8(rgb01)
    rgba[:, :, 3] = 255
    return struct.pack("<4sIII", FRAME_MAGIC, w, h, frame_id) + rgba.tobytes()


@dataclass
class SessionState:
    """Mutable per-session render state; reads take consistent snapshots."""

    camera: object
    gaze: dict = field(default_factory=dict)      # eye id -> (u, v)
    mode: str = "foveated"
    frame_id: int = 0
    last_timings: dict = field(default_factory=dict)
    tick_log: list = field(default_factory=list)  # recent (frame_id, gaze_used, mode)

    def clamped_gaze(self, eye: int = 0):
        cam = self.camera
        g = self.gaze.get(eye, (cam.width / 2, cam.height / 2))
        return (float(np.clip(g[0], 0, cam.width - 1)),
                float(np.clip(g[1], 0, cam.height - 1)))


class FrameService:
    def __init__(self, bundle: SceneBundle, opts: PipelineOptions | None = None,
                 host: str = "127.0.0.1", port: int = 0):
        self.bundle = bundle
        self.opts = opts or PipelineOptions()
        self.host = host
        self.port = port
        self.state = SessionState(camera=bundle.cameras[0])
        self._busy = False

    # -- message handling ----------------------------------------------------

    async def _handle_message(self, ws, raw) -> None:
        if isinstance(raw, (bytes, bytearray)):
            await ws.send(json.dumps({"type": "error", "message": "binary control messages not supported"}))
            return
        try:
            msg = json.loads(raw)
            mtype = msg["type"]
        except (ValueError, KeyError, TypeError):
            await ws.send(json.dumps({"type": "error", "message": "malformed message"}))
            return
        payload = msg.get("payload", {})
        try:
            if mtype == "SetGaze":
                self.state.gaze[int(payload.get("eye", 0))] = (float(payload["u"]), float(payload["v"]))
                await ws.send(json.dumps({"type": "ack", "of": "SetGaze"}))
            elif mtype == "SetMode":
                mode = _MODE_ALIASES.get(payload["mode"])
                if mode is None:
                    raise ValueError(f"unknown mode {payload['mode']!r}")
                self.state.mode = mode
                await ws.send(json.dumps({"type": "ack", "of": "SetMode", "mode": self.state.mode}))
            elif mtype == "SetCamera":
                cam = self.state.camera
                d = {**{k: getattr(cam, k) for k in ("fx", "fy", "cx", "cy", "width", "height",
                                                     "near", "far", "exposure", "gamma")},
                     "r": cam.r.tolist(), "t": cam.t.tolist()}
                pose = payload.get("pose", {})
                intr = payload.get("intrinsics", {})
                d.update({k: pose[k] for k in ("r", "t") if k in pose})
                d.update({k: intr[k] for k in ("fx", "fy", "cx", "cy") if k in intr})
                self.state.camera = camera_from_dict(d)
                await ws.send(json.dumps({"type": "ack", "of": "SetCamera"}))
            elif mtype == "SetParam":
                name = payload["name"]
                if name not in _PARAMS:
                    raise ValueError(f"unknown param {name!r}")
                value = float(payload["value"])
                if name == "m":
                    self.opts.m = value
                elif name == "gamma_edge":
                    self.opts.gamma_edge = value
                else:
                    self.opts.d_f = int(value) // 2
                await ws.send(json.dumps({"type": "ack", "of": "SetParam", "name": name}))
            elif mtype == "Stats":
                cam = self.state.camera
                await ws.send(json.dumps({"type": "stats", "payload": {
                    "frame_id": self.state.frame_id, "mode": self.state.mode,
                    "camera": {"r": cam.r.tolist(), "t": cam.t.tolist(),
                               "width": cam.width, "height": cam.height},
                    **self.state.last_timings}}))
            elif mtype == "FrameLog":
                await ws.send(json.dumps({"type": "framelog", "payload": self.state.tick_log[-32:]}))
            elif mtype == "RenderFrame":
                await self._render_tick(ws)
            else:
                await ws.send(json.dumps({"type": "error", "message": f"unknown type {mtype!r}"}))
        except (KeyError, TypeError, ValueError) as e:
            await ws.send(json.dumps({"type": "error", "message": str(e)}))

    async def _render_tick(self, ws) -> None:
        state = self.state
        camera, mode = state.camera, state.mode
        opts = PipelineOptions(**{**self.opts.__dict__, "mode": mode})
        gaze_used = {}

        def latch():
            # called between the peripheral and foveal passes
            g = state.clamped_gaze()
            gaze_used["g"] = g
            return g

        loop = asyncio.get_running_loop()
        result = await loop.run_in_executor(
            None, lambda: render_frame(self.bundle.gaussians, self.bundle.points,
                                       camera, state.clamped_gaze(), opts,
                                       gaze_provider=latch))
        state.frame_id += 1
        state.last_timings = result.timings_ms
        state.tick_log.append({"frame_id": state.frame_id,
                               "gaze_used": list(gaze_used.get("g", state.clamped_gaze())),
                               "mode": mode})
        del state.tick_log[:-64]
        await ws.send(encode_frame(result.ldr, state.frame_id))

    # -- server --------------------------------------------------------------

    async def handler(self, ws) -> None:
        if self._busy:
            await ws.close(code=1013, reason="session busy: one client per session")
            return
        self._busy = True
        try:
            async for raw in ws:
                await self._handle_message(ws, raw)
        finally:
            self._busy = False

    async def start(self):
        from websockets.asyncio.server import serve as ws_serve
        server = await ws_serve(self.handler, self.host, self.port)
        sock = next(iter(server.sockets))
        self.port = sock.getsockname()[1]
        return server

    async def run_forever(self) -> None:
        server = await self.start()
        print(f"fovsplat frame service listening on ws://{self.host}:{self.port}", flush=True)
        await server.serve_forever()


def serve(bundle: SceneBundle, host: str = "127.0.0.1", port: int = 8765,
          opts: PipelineOptions | None = None) -> None:
    """Blocking entry point used by the CLI."""
    svc = FrameService(bundle, opts=opts, host=host, port=port)
    try:
        asyncio.run(svc.run_forever())
    except KeyboardInterrupt:
        pass


class BackgroundService:
    """Run a FrameService on a daemon thread (tests, demos)."""

    def __init__(self, bundle: SceneBundle, opts: PipelineOptions | None = None):
        self.service = FrameService(bundle, opts=opts, port=0)
        self._loop = None
        self._server = None
        self._thread = None
        self._started = threading.Event()

    def __enter__(self):
        def runner():
            self._loop = asyncio.new_event_loop()
            asyncio.set_event_loop(self._loop)

            async def boot():
                self._server = await self.service.start()
                self._started.set()

            self._loop.run_until_complete(boot())
            self._loop.run_forever()

        self._thread = threading.Thread(target=runner, daemon=True)
        self._thread.start()
        if not self._started.wait(timeout=30):
            raise RuntimeError("frame service failed to start")
        return self

    @property
    def url(self) -> str:
        return f"ws://{self.service.host}:{self.service.port}"

    def __exit__(self, *exc):
        if self._loop is not None:
            def shutdown():
                if self._server is not None:
                    self._server.close()
                self._loop.stop()
            self._loop.call_soon_threadsafe(shutdown)
        if self._thread is not None:
            self._thread.join(timeout=5)
        return False
