/**
 * Approximate back-to-front ordering for alpha compositing.
 *
 * Splats are keyed by squared distance to the camera center (a radial
 * approximation of view depth, standard for splat viewers) and sorted
 * descending. The viewer re-sorts on a frame cadence, not per frame;
 * visual fidelity, not oracle equality, is the contract here.
 */

import { Vec3 } from "./camera.js";

/**
 * Returns `indices` reordered back-to-front for the given camera center.
 * The input array is not modified.
 */
export function depthOrder(
  positions: Float32Array,
  cameraPos: Vec3,
  indices: Uint32Array,
): Uint32Array {
  const keys = new Float64Array(indices.length);
  for (let i = 0; i < indices.length; i++) {
    const g = indices[i]! * 3;
    const dx = positions[g]! - cameraPos[0];
    const dy = positions[g + 1]! - cameraPos[1];
    const dz = positions[g + 2]! - cameraPos[2];
    keys[i] = dx * dx + dy * dy + dz * dz;
  }
  const order = Array.from(indices.keys());
  order.sort((a, b) => keys[b]! - keys[a]!);
  const out = new Uint32Array(indices.length);
  for (let i = 0; i < indices.length; i++) {
    out[i] = indices[order[i]!]!;
  }
  return out;
}
