/**
 * Pointer-driven probe control standing in for the tracked stylus.
 *
 * Mouse x/y steer the probe in the ground plane (world x/z), the wheel
 * or PageUp/PageDown move it in height (world y). Pose messages go out
 * at the display rate capped to 120 Hz, with a 5 Hz keepalive while the
 * pointer rests; a primary-button press sends exactly one click.
 */

import type { Camera } from "./projection.js";
import { unproject } from "./projection.js";

export const POSE_RATE_CAP_HZ = 120;
export const KEEPALIVE_HZ = 5;
export const WHEEL_STEP_CM = 0.25;

export interface PoseSink {
  sendPose(x: number, y: number, z: number): void;
  sendClick(): void;
}

export class InputLoop {
  probe: [number, number, number];
  private lastSent = 0;
  private dirty = true;
  private timer: number | null = null;

  constructor(
    private readonly canvas: HTMLCanvasElement,
    private readonly camera: () => Camera,
    private readonly sink: PoseSink,
    startProbe: [number, number, number],
  ) {
    this.probe = [...startProbe] as [number, number, number];
  }

  attach(): void {
    this.canvas.addEventListener("pointermove", this.onMove);
    this.canvas.addEventListener("pointerdown", this.onDown);
    this.canvas.addEventListener("wheel", this.onWheel, { passive: false });
    window.addEventListener("keydown", this.onKey);
    const tick = () => {
      this.flush(performance.now());
      this.timer = window.setTimeout(tick, 1000 / POSE_RATE_CAP_HZ);
    };
    tick();
  }

  detach(): void {
    this.canvas.removeEventListener("pointermove", this.onMove);
    this.canvas.removeEventListener("pointerdown", this.onDown);
    this.canvas.removeEventListener("wheel", this.onWheel);
    window.removeEventListener("keydown", this.onKey);
    if (this.timer !== null) clearTimeout(this.timer);
  }

  private onMove = (ev: PointerEvent) => {
    const rect = this.canvas.getBoundingClientRect();
    const ground = unproject(
      this.camera(),
      ev.clientX - rect.left,
      ev.clientY - rect.top,
      this.probe[1],
    );
    this.probe[0] = ground.x;
    this.probe[2] = ground.z;
    this.dirty = true;
  };

  private onDown = (ev: PointerEvent) => {
    if (ev.button === 0) this.sink.sendClick();
  };

  private onWheel = (ev: WheelEvent) => {
    ev.preventDefault();
    this.probe[1] += ev.deltaY < 0 ? WHEEL_STEP_CM : -WHEEL_STEP_CM;
    this.dirty = true;
  };

  private onKey = (ev: KeyboardEvent) => {
    if (ev.key === "PageUp") {
      this.probe[1] += WHEEL_STEP_CM;
      this.dirty = true;
    } else if (ev.key === "PageDown") {
      this.probe[1] -= WHEEL_STEP_CM;
      this.dirty = true;
    }
  };

  /** Emit a pose when due: on movement at the cap, else at keepalive rate. */
  flush(nowMs: number): void {
    const since = nowMs - this.lastSent;
    if ((this.dirty && since >= 1000 / POSE_RATE_CAP_HZ) || since >= 1000 / KEEPALIVE_HZ) {
      this.sink.sendPose(this.probe[0], this.probe[1], this.probe[2]);
      this.lastSent = nowMs;
      this.dirty = false;
    }
  }
}
