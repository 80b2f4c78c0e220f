"""Websocket session service.

One independent pipeline per connection: text frames carry poses, clicks,
and session control; the server runs the displacement mapping on the
freshest pose, renders audio block by block paced by the wall clock, and
streams sequence-numbered 16-bit PCM frames plus JSON parameter frames.
Completed sessions are written in the same JSON schema the agent harness
emits, so both feed the identical analysis path.

Mode rules are enforced server-side: parameter/PCM frames flow only in
the auditory modes (a, av) and target frames only in the visual modes
(v, av).
"""

from __future__ import annotations

import asyncio
import hashlib
import json
import math
import os
import time
from dataclasses import dataclass

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.staticfiles import StaticFiles

from . import __version__
from .analysis import path_length, precision
from .config import layout_spec_from, mapping_config_from, synth_config_from
from .mapping import detect_crossings, map_displacement
from .scene import (
    GroupOrder,
    GuidanceMode,
    ProbeSample,
    SceneError,
    Session,
    Trial,
    Vec3,
    displacement,
    target_path,
)
from .synth import init_state, pcm16_frame, render_block, trigger_event

POSE_RATE_CAP_HZ = 120.0
RESYNC_BLOCKS = 2.0   # re-anchor the block clock when this far behind


@dataclass(frozen=True)
class ServiceConfig:
    listen: str = "127.0.0.1:8765"
    mapping_path: str | None = None
    synth_path: str | None = None
    layout_path: str | None = None
    out_dir: str = "sessions"
    transport: str = "pcm-stream"          # or "params-only"
    static_dir: str | None = None
    seed: int = 0

    def __post_init__(self):
        if self.transport not in ("pcm-stream", "params-only"):
            raise ValueError(f"unknown transport {self.transport!r}")
        for p in (self.mapping_path, self.synth_path, self.layout_path):
            if p is not None and not os.path.exists(p):
                raise ValueError(f"config references missing file {p}")

    def resolved_dict(self) -> dict:
        return {
            "listen": self.listen,
            "mapping_path": self.mapping_path,
            "synth_path": self.synth_path,
            "layout_path": self.layout_path,
            "out_dir": self.out_dir,
            "transport": self.transport,
            "static_dir": self.static_dir,
            "seed": self.seed,
        }

    def config_hash(self) -> str:
        blob = json.dumps(self.resolved_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


class _Pipeline:
    """Per-connection session state; lives on the event loop thread only."""

    def __init__(self, ws: WebSocket, cfg: ServiceConfig):
        self.ws = ws
        self.cfg = cfg
        self.mcfg = mapping_config_from(cfg.mapping_path)
        self.scfg = synth_config_from(cfg.synth_path)
        self.layout_spec = layout_spec_from(cfg.layout_path)
        self.layout = self.layout_spec.build_layout()
        self.path = target_path(self.layout, self.layout_spec.path_seed)
        self.synth = init_state(self.scfg, cfg.seed)
        self.mode = GuidanceMode.AV
        self.latest_pose: Vec3 | None = None
        self.prev_pose: Vec3 | None = None
        self.seq = 0
        self.running = True
        # session bookkeeping
        self.session_active = False
        self.participant_id = ""
        self.order: GroupOrder | None = None
        self.trial_idx = 0
        self.trial_samples: list[ProbeSample] = []
        self.trial_t0 = 0.0
        self.last_record_t = -math.inf
        self.dropped_poses = 0
        self.finished_trials: list[Trial] = []

    # -- helpers ----------------------------------------------------------

    @property
    def target(self) -> Vec3:
        return self.layout.targets[self.path[self.trial_idx]]

    @property
    def audio_on(self) -> bool:
        return self.mode in (GuidanceMode.A, GuidanceMode.AV)

    @property
    def target_visible(self) -> bool:
        return self.mode in (GuidanceMode.V, GuidanceMode.AV)

    async def send_json(self, payload: dict) -> None:
        await self.ws.send_text(json.dumps(payload))

    async def send_target(self) -> None:
        if self.target_visible:
            t = self.target
            await self.send_json(
                {"type": "target", "x": t.x, "y": t.y, "z": t.z, "visible": True}
            )

    # -- inbound messages --------------------------------------------------

    async def handle(self, msg: dict) -> None:
        kind = msg.get("type")
        if kind == "pose":
            self.on_pose(Vec3(float(msg["x"]), float(msg["y"]), float(msg["z"])))
        elif kind == "click" or kind == "next_trial":
            await self.on_click()
        elif kind == "mode":
            mode = GuidanceMode.parse(str(msg["value"]))
            if self.session_active:
                await self.send_json(
                    {"type": "error", "detail": "mode follows the decade schedule during a session"}
                )
            else:
                self.mode = mode
                await self.send_target()
        elif kind == "start_session":
            await self.on_start(str(msg["participant_id"]), str(msg["order"]))
        else:
            raise ValueError(f"unknown message type {kind!r}")

    def on_pose(self, pose: Vec3) -> None:
        if self.latest_pose is not None:
            ev = detect_crossings(self.latest_pose, pose, self.target)
            if self.audio_on:
                if ev.height_crossed:
                    trigger_event(self.synth, "click")
                if ev.depth_crossed:
                    trigger_event(self.synth, "chord")
        self.prev_pose = self.latest_pose
        self.latest_pose = pose
        if self.session_active:
            now = time.monotonic()
            if now - self.last_record_t >= 1.0 / POSE_RATE_CAP_HZ:
                self.trial_samples.append(ProbeSample(now - self.trial_t0, pose))
                self.last_record_t = now
            else:
                # over the cap: the newest pose replaces the unrecorded one
                if self.trial_samples:
                    self.dropped_poses += 1
                    self.trial_samples[-1] = ProbeSample(
                        self.trial_samples[-1].t, pose
                    )

    async def on_start(self, participant_id: str, order_name: str) -> None:
        self.participant_id = participant_id
        self.order = GroupOrder.parse(order_name)
        self.session_active = True
        self.trial_idx = 0
        self.finished_trials = []
        self.mode = self.order.modes[0]
        self._begin_trial()
        await self.send_target()

    def _begin_trial(self) -> None:
        self.trial_samples = []
        self.trial_t0 = time.monotonic()
        self.last_record_t = -math.inf
        self.dropped_poses = 0
        if self.latest_pose is not None:
            self.trial_samples.append(ProbeSample(0.0, self.latest_pose))
            self.last_record_t = self.trial_t0

    async def on_click(self) -> None:
        if not self.session_active:
            await self.send_json({"type": "error", "detail": "no active session"})
            return
        if not self.trial_samples:
            await self.send_json({"type": "error", "detail": "no poses recorded yet"})
            return
        last = self.trial_samples[-1]
        trial = Trial(
            index=self.trial_idx + 1,
            target=self.target,
            mode=self.mode,
            samples=tuple(self.trial_samples),
            click_pos=last.pos,
            click_t=last.t,
        )
        self.finished_trials.append(trial)
        prec = precision(trial, trial.target)
        await self.send_json(
            {
                "type": "trial_done",
                "trial": trial.index,
                "metrics": {
                    "duration": trial.click_t,
                    "length": path_length(trial),
                    "prec": prec[0],
                    "prec_x": prec[1],
                    "prec_y": prec[2],
                    "prec_z": prec[3],
                },
                "dropped_poses": self.dropped_poses,
            }
        )
        if trial.index == 30:
            path = self._write_session()
            self.session_active = False
            await self.send_json({"type": "session_done", "file": path})
            return
        self.trial_idx += 1
        self.mode = self.order.modes[self.trial_idx // 10]
        self._begin_trial()
        await self.send_target()

    def _write_session(self) -> str:
        os.makedirs(self.cfg.out_dir, exist_ok=True)
        session = Session(
            participant_id=self.participant_id,
            order=self.order,
            trials=tuple(self.finished_trials),
        )
        fname = os.path.join(self.cfg.out_dir, f"{self.participant_id}.json")
        with open(fname, "w") as fh:
            json.dump(session.to_dict(), fh)
            fh.write("\n")
        return fname

    def write_partial(self) -> None:
        """Persist an interrupted session without schema validation."""
        if not self.finished_trials or not self.session_active:
            return
        os.makedirs(self.cfg.out_dir, exist_ok=True)
        fname = os.path.join(self.cfg.out_dir, f"{self.participant_id}.partial.json")
        with open(fname, "w") as fh:
            json.dump(
                {
                    "participant_id": self.participant_id,
                    "order": self.order.name if self.order else "",
                    "trials": [t.to_dict() for t in self.finished_trials],
                },
                fh,
            )
            fh.write("\n")

    # -- outbound render loop ----------------------------------------------

    async def render_loop(self) -> None:
        block_dt = self.scfg.block_dt
        loop = asyncio.get_running_loop()
        next_t = loop.time() + block_dt
        while self.running:
            if self.audio_on and self.latest_pose is not None:
                params = map_displacement(
                    displacement(self.latest_pose, self.target), self.mcfg
                )
                block = render_block(self.synth, params, self.scfg)
                if self.cfg.transport == "pcm-stream":
                    await self.ws.send_bytes(pcm16_frame(block, self.seq))
                    self.seq += 1
                frame = params.to_dict()
                frame["type"] = "params"
                await self.send_json(frame)
            delay = next_t - loop.time()
            if delay < -RESYNC_BLOCKS * block_dt:
                next_t = loop.time() + block_dt   # drift resync, no backlog
            else:
                next_t += block_dt
            await asyncio.sleep(max(0.0, delay))


def build_app(cfg: ServiceConfig) -> FastAPI:
    app = FastAPI(title="soniguide", version=__version__)

    @app.get("/healthz")
    async def healthz():
        return {"version": __version__, "config_hash": cfg.config_hash()}

    @app.websocket("/session")
    async def session_ws(ws: WebSocket):
        await ws.accept()
        pipe = _Pipeline(ws, cfg)
        render_task = asyncio.create_task(pipe.render_loop())
        try:
            while True:
                raw = await ws.receive_text()
                try:
                    msg = json.loads(raw)
                    if not isinstance(msg, dict):
                        raise ValueError("message must be a JSON object")
                    await pipe.handle(msg)
                except (ValueError, KeyError, SceneError) as exc:
                    await pipe.send_json({"type": "error", "detail": str(exc)})
                    break
        except WebSocketDisconnect:
            pass
        finally:
            pipe.running = False
            render_task.cancel()
            pipe.write_partial()
            try:
                await ws.close()
            except Exception:
                pass

    if cfg.static_dir and os.path.isdir(cfg.static_dir):
        app.mount("/", StaticFiles(directory=cfg.static_dir, html=True), name="ui")
    return app


def load_service_config(path=None, env=None, **overrides) -> ServiceConfig:
    """Assemble config with flag > env > file precedence."""
    env = os.environ if env is None else env
    data: dict = {}
    if path:
        with open(path) as fh:
            data.update(json.load(fh))
    env_map = {
        "listen": "SONIGUIDE_LISTEN",
        "mapping_path": "SONIGUIDE_MAPPING",
        "synth_path": "SONIGUIDE_SYNTH",
        "layout_path": "SONIGUIDE_LAYOUT",
        "out_dir": "SONIGUIDE_OUT_DIR",
        "transport": "SONIGUIDE_TRANSPORT",
        "static_dir": "SONIGUIDE_STATIC_DIR",
    }
    for key, var in env_map.items():
        if env.get(var):
            data[key] = env[var]
    for key, val in overrides.items():
        if val is not None:
            data[key] = val
    return ServiceConfig(**data)


def serve(cfg: ServiceConfig) -> None:
    import uvicorn

    host, _, port = cfg.listen.rpartition(":")
    uvicorn.run(build_app(cfg), host=host or "127.0.0.1", port=int(port), log_level="warning")
