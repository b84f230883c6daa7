import { describe, expect, it } from "vitest";

import {
  PITCH_LIMIT,
  cameraPosition,
  cross,
  defaultCamera,
  dolly,
  dot,
  fly,
  norm,
  orbit,
  viewDirection,
  viewMatrix,
} from "../src/camera.js";

describe("orbit", () => {
  it("a full 360-degree orbit returns to the start pose within float tolerance", () => {
    const start = defaultCamera([0.3, -0.2, 1.1], 2.5);
    let cam = orbit(start, 0, 0.4);
    const reference = cameraPosition(cam);

    const steps = 480;
    for (let i = 0; i < steps; i++) {
      cam = orbit(cam, (2 * Math.PI) / steps, 0);
    }
    const after = cameraPosition(cam);
    for (let axis = 0; axis < 3; axis++) {
      expect(Math.abs(after[axis]! - reference[axis]!)).toBeLessThanOrEqual(1e-9);
    }
    expect(Math.abs(cam.pitch - 0.4)).toBeLessThanOrEqual(1e-12);
  });

  it("pitch clamps short of the poles so up never parallels the view", () => {
    let cam = defaultCamera();
    cam = orbit(cam, 0, 100);
    expect(cam.pitch).toBe(PITCH_LIMIT);
    cam = orbit(cam, 0, -200);
    expect(cam.pitch).toBe(-PITCH_LIMIT);
    const sine = norm(cross(viewDirection(cam), cam.up));
    expect(sine).toBeGreaterThan(1e-3);
  });
});

describe("dolly", () => {
  it("is multiplicative and clamped", () => {
    const cam = defaultCamera([0, 0, 0], 2);
    expect(dolly(cam, 1.5).distance).toBeCloseTo(3, 12);
    expect(dolly(cam, 0.5).distance).toBeCloseTo(1, 12);
    expect(dolly(cam, 1e-9).distance).toBeGreaterThan(0);
    expect(dolly(cam, 1e9).distance).toBeLessThanOrEqual(1e4);
  });

  it("does not move the target", () => {
    const cam = defaultCamera([1, 2, 3], 2);
    expect(dolly(cam, 2).target).toEqual([1, 2, 3]);
  });
});

describe("fly", () => {
  it("moves the target along the forward axis", () => {
    const cam = defaultCamera([0, 0, 0], 4);
    const forward = viewDirection(cam);
    const moved = fly(cam, 0, 0, 0.5);
    for (let axis = 0; axis < 3; axis++) {
      expect(moved.target[axis]!).toBeCloseTo(0.5 * forward[axis]!, 12);
    }
    expect(moved.distance).toBe(cam.distance);
  });

  it("right/up moves are orthogonal to forward", () => {
    const cam = orbit(defaultCamera(), 0.7, 0.3);
    const forward = viewDirection(cam);
    const right = fly(cam, 1, 0, 0);
    const moveDir = [
      right.target[0] - cam.target[0],
      right.target[1] - cam.target[1],
      right.target[2] - cam.target[2],
    ] as [number, number, number];
    expect(Math.abs(dot(moveDir, forward))).toBeLessThanOrEqual(1e-12);
  });
});

describe("view matrix", () => {
  it("maps the target to [0, 0, -distance]", () => {
    const cam = orbit(defaultCamera([0.4, 0.1, -0.2], 3), 1.1, -0.35);
    const m = viewMatrix(cam);
    const t = cam.target;
    const x = m[0]! * t[0] + m[4]! * t[1] + m[8]! * t[2] + m[12]!;
    const y = m[1]! * t[0] + m[5]! * t[1] + m[9]! * t[2] + m[13]!;
    const z = m[2]! * t[0] + m[6]! * t[1] + m[10]! * t[2] + m[14]!;
    expect(Math.abs(x)).toBeLessThanOrEqual(1e-6);
    expect(Math.abs(y)).toBeLessThanOrEqual(1e-6);
    expect(Math.abs(z + cam.distance)).toBeLessThanOrEqual(1e-6);
  });
});
