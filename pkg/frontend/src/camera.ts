/**
 * Orbit/dolly/fly camera. Pure state + math, no DOM.
 *
 * The camera orbits a target point on a yaw/pitch sphere of radius
 * `distance`, with a fixed world up. Pitch is clamped short of the poles
 * so the up vector never becomes parallel to the view direction.
 */

export type Vec3 = [number, number, number];

export interface OrbitCamera {
  target: Vec3;
  /** Radians around the up axis. */
  yaw: number;
  /** Radians above the horizontal plane, clamped to +-PITCH_LIMIT. */
  pitch: number;
  distance: number;
  up: Vec3;
  /** Vertical field of view, radians. */
  fovY: number;
}

export const PITCH_LIMIT = Math.PI / 2 - 0.01;
const MIN_DISTANCE = 1e-3;
const MAX_DISTANCE = 1e4;

export function defaultCamera(target: Vec3 = [0, 0, 0], distance = 4): OrbitCamera {
  return {
    target,
    yaw: 0,
    pitch: 0,
    distance,
    up: [0, 1, 0],
    fovY: (50 * Math.PI) / 180,
  };
}

function add(a: Vec3, b: Vec3): Vec3 {
  return [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
}

function scale(a: Vec3, s: number): Vec3 {
  return [a[0] * s, a[1] * s, a[2] * s];
}

function sub(a: Vec3, b: Vec3): Vec3 {
  return [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
}

export function cross(a: Vec3, b: Vec3): Vec3 {
  return [
    a[1] * b[2] - a[2] * b[1],
    a[2] * b[0] - a[0] * b[2],
    a[0] * b[1] - a[1] * b[0],
  ];
}

export function dot(a: Vec3, b: Vec3): number {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

export function norm(a: Vec3): number {
  return Math.sqrt(dot(a, a));
}

export function normalize(a: Vec3): Vec3 {
  const n = norm(a);
  return n > 0 ? scale(a, 1 / n) : [0, 0, 1];
}

/** Camera center in world space for the current orbit state. */
export function cameraPosition(cam: OrbitCamera): Vec3 {
  // Spherical offset in the y-up frame: yaw 0 looks down -z.
  const cp = Math.cos(cam.pitch);
  const dir: Vec3 = [
    Math.sin(cam.yaw) * cp,
    Math.sin(cam.pitch),
    Math.cos(cam.yaw) * cp,
  ];
  return add(cam.target, scale(dir, cam.distance));
}

/** Unit vector from the camera toward the target. */
export function viewDirection(cam: OrbitCamera): Vec3 {
  return normalize(sub(cam.target, cameraPosition(cam)));
}

export function orbit(cam: OrbitCamera, dYaw: number, dPitch: number): OrbitCamera {
  const pitch = Math.min(PITCH_LIMIT, Math.max(-PITCH_LIMIT, cam.pitch + dPitch));
  return { ...cam, yaw: cam.yaw + dYaw, pitch };
}

/** Multiplicative zoom: factor > 1 moves away, < 1 moves in. */
export function dolly(cam: OrbitCamera, factor: number): OrbitCamera {
  const distance = Math.min(
    MAX_DISTANCE,
    Math.max(MIN_DISTANCE, cam.distance * factor),
  );
  return { ...cam, distance };
}

/**
 * Fly: translate the target (and therefore the camera) along the view
 * basis. dx = right, dy = up, dz = forward, in world units.
 */
export function fly(cam: OrbitCamera, dx: number, dy: number, dz: number): OrbitCamera {
  const forward = viewDirection(cam);
  const right = normalize(cross(forward, cam.up));
  const up = cross(right, forward);
  const move = add(add(scale(right, dx), scale(up, dy)), scale(forward, dz));
  return { ...cam, target: add(cam.target, move) };
}

/** Column-major 4x4 world-to-camera matrix (right-handed look-at). */
export function viewMatrix(cam: OrbitCamera): Float32Array {
  const eye = cameraPosition(cam);
  const f = viewDirection(cam);
  const r = normalize(cross(f, cam.up));
  const u = cross(r, f);
  // prettier-ignore
  return new Float32Array([
    r[0], u[0], -f[0], 0,
    r[1], u[1], -f[1], 0,
    r[2], u[2], -f[2], 0,
    -dot(r, eye), -dot(u, eye), dot(f, eye), 1,
  ]);
}

/** Column-major 4x4 perspective projection. */
export function projectionMatrix(
  fovY: number,
  aspect: number,
  near = 0.02,
  far = 200,
): Float32Array {
  const t = 1 / Math.tan(fovY / 2);
  const d = 1 / (near - far);
  // prettier-ignore
  return new Float32Array([
    t / aspect, 0, 0, 0,
    0, t, 0, 0,
    0, 0, (near + far) * d, -1,
    0, 0, 2 * near * far * d, 0,
  ]);
}
