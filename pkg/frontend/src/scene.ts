/**
 * Canvas renderer: skull outline, green target sphere, semi-transparent
 * orange probe sphere, all in the top view. In the auditory mode the
 * canvas paints solid black and nothing else.
 */

import type { Camera } from "./projection.js";
import { PROBE_RADIUS_CM, TARGET_RADIUS_CM, project } from "./projection.js";
import type { ViewState } from "./state.js";
import { canvasBlank } from "./state.js";

const SKULL_X_CM = 7.5;
const SKULL_Z_CM = 6.5;

export function renderScene(ctx: CanvasRenderingContext2D, cam: Camera, state: ViewState): void {
  const { width, height } = ctx.canvas;
  ctx.fillStyle = "#000";
  ctx.fillRect(0, 0, width, height);
  if (canvasBlank(state)) {
    return;
  }

  // skull proxy outline (equator ellipse seen from above)
  ctx.strokeStyle = "#777";
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  ctx.ellipse(cam.cx, cam.cy, SKULL_X_CM * cam.scale, SKULL_Z_CM * cam.scale, 0, 0, 2 * Math.PI);
  ctx.stroke();

  if (state.target && state.targetVisible) {
    const t = project(cam, ...state.target);
    ctx.fillStyle = "#2ecc40";
    ctx.beginPath();
    ctx.arc(t.x, t.y, t.radius(TARGET_RADIUS_CM), 0, 2 * Math.PI);
    ctx.fill();
  }

  const p = project(cam, ...state.probe);
  ctx.fillStyle = "rgba(255, 133, 27, 0.55)";
  ctx.strokeStyle = "rgba(255, 133, 27, 0.9)";
  ctx.beginPath();
  ctx.arc(p.x, p.y, p.radius(PROBE_RADIUS_CM), 0, 2 * Math.PI);
  ctx.fill();
  ctx.stroke();
}
