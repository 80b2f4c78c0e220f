/**
 * Top-view projection of the workspace.
 *
 * The camera hangs above the skull looking straight down: world x maps to
 * screen x, world z (front/back) maps to screen y, and world y (height)
 * lies along the viewing axis, so it shows up only as a small size and
 * parallax change - deliberately hard to read, which is exactly why the
 * sonification carries that axis.
 */

export interface Camera {
  /** camera height above the origin in cm */
  height: number;
  /** pixels per cm at y = 0 */
  scale: number;
  /** canvas center in pixels */
  cx: number;
  cy: number;
}

export const TARGET_RADIUS_CM = 0.3;
export const PROBE_RADIUS_CM = 0.5;

export function defaultCamera(width: number, height: number): Camera {
  return { height: 60.0, scale: Math.min(width, height) / 28.0, cx: width / 2, cy: height / 2 };
}

export interface Projected {
  x: number;
  y: number;
  /** screen radius for a sphere of the given world radius */
  radius: (worldRadius: number) => number;
}

export function project(cam: Camera, wx: number, wy: number, wz: number): Projected {
  const depth = Math.max(cam.height - wy, 1e-3);
  const mag = cam.height / depth; // higher probe -> slightly bigger
  return {
    x: cam.cx + wx * cam.scale * mag,
    y: cam.cy + wz * cam.scale * mag,
    radius: (worldRadius: number) => worldRadius * cam.scale * mag,
  };
}

/** Inverse of `project` in the ground plane at a fixed world height. */
export function unproject(cam: Camera, sx: number, sy: number, wy: number): { x: number; z: number } {
  const depth = Math.max(cam.height - wy, 1e-3);
  const mag = cam.height / depth;
  return {
    x: (sx - cam.cx) / (cam.scale * mag),
    z: (sy - cam.cy) / (cam.scale * mag),
  };
}

/** True when the target sphere is drawn fully inside the probe sphere. */
export function containsOnScreen(cam: Camera, probe: [number, number, number], target: [number, number, number]): boolean {
  const p = project(cam, ...probe);
  const t = project(cam, ...target);
  const dist = Math.hypot(p.x - t.x, p.y - t.y);
  return dist + t.radius(TARGET_RADIUS_CM) <= p.radius(PROBE_RADIUS_CM);
}
