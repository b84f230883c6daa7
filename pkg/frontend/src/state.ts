/**
 * Viewer state and the pure input reducer.
 *
 * All interaction flows through handleInput(state, event) -> state; the
 * decoded asset is never mutated, only the camera and render options
 * change. Render code consumes the state read-only.
 */

import {
  DecodedAsset,
  SplatDecodeError,
  decodeSplat,
} from "./decoder.js";
import {
  OrbitCamera,
  defaultCamera,
  dolly,
  fly,
  orbit,
  Vec3,
} from "./camera.js";

export interface RenderOptions {
  /** Draw at most this many splats (highest-opacity ones kept). */
  pointBudget: number;
  /**
   * Splats with opacity <= floor are hidden. The floor is exclusive so
   * the slider's maximum (1.0) blanks the scene entirely.
   */
  opacityFloor: number;
  /** Re-sort splats by depth every this many frames. */
  sortCadence: number;
  /** Overlay wireframe boxes of each chunk's position bounds. */
  showChunkBounds: boolean;
}

export interface ViewerState {
  asset: DecodedAsset | null;
  camera: OrbitCamera;
  options: RenderOptions;
  /** Non-null when the last load failed; shown as a banner. */
  error: string | null;
}

export const DEFAULT_OPTIONS: RenderOptions = {
  pointBudget: 1_000_000,
  opacityFloor: 0,
  sortCadence: 8,
  showChunkBounds: false,
};

export function initialState(): ViewerState {
  return {
    asset: null,
    camera: defaultCamera(),
    options: { ...DEFAULT_OPTIONS },
    error: null,
  };
}

/** Midpoint of the asset's chunk position bounds, for framing. */
export function assetCenter(asset: DecodedAsset): Vec3 {
  const lo: Vec3 = [Infinity, Infinity, Infinity];
  const hi: Vec3 = [-Infinity, -Infinity, -Infinity];
  for (const chunk of asset.chunks) {
    for (let axis = 0; axis < 3; axis++) {
      lo[axis] = Math.min(lo[axis]!, chunk.posLo[axis]!);
      hi[axis] = Math.max(hi[axis]!, chunk.posHi[axis]!);
    }
  }
  return [(lo[0] + hi[0]) / 2, (lo[1] + hi[1]) / 2, (lo[2] + hi[2]) / 2];
}

/**
 * Decodes bytes into the state. A malformed asset sets `error` (the UI
 * banner) and leaves the previous asset in place; it never throws.
 */
export function loadAsset(state: ViewerState, data: ArrayBuffer | Uint8Array): ViewerState {
  try {
    const asset = decodeSplat(data);
    const camera = { ...state.camera, target: assetCenter(asset) };
    return { ...state, asset, camera, error: null };
  } catch (err) {
    if (err instanceof SplatDecodeError) {
      return { ...state, error: err.message };
    }
    throw err;
  }
}

/**
 * Indices of splats the current options allow, in asset order. Splats at
 * or below the opacity floor are hidden; the point budget keeps the most
 * opaque survivors.
 */
export function visibleIndices(asset: DecodedAsset, options: RenderOptions): Uint32Array {
  const selected: number[] = [];
  for (let i = 0; i < asset.count; i++) {
    if (asset.opacities[i]! > options.opacityFloor) {
      selected.push(i);
    }
  }
  if (selected.length > options.pointBudget) {
    selected.sort((a, b) => asset.opacities[b]! - asset.opacities[a]!);
    selected.length = options.pointBudget;
    selected.sort((a, b) => a - b);
  }
  return Uint32Array.from(selected);
}

export type InputEvent =
  | { kind: "drag"; dx: number; dy: number }
  | { kind: "scroll"; delta: number }
  | { kind: "fly"; dx: number; dy: number; dz: number }
  | { kind: "opacity-floor"; value: number }
  | { kind: "point-budget"; value: number }
  | { kind: "toggle-chunk-bounds" };

const ORBIT_SPEED = 0.008;
const SCROLL_BASE = 1.1;

/** Pure reducer: maps an input event to the next state. */
export function handleInput(state: ViewerState, event: InputEvent): ViewerState {
  switch (event.kind) {
    case "drag":
      return {
        ...state,
        camera: orbit(state.camera, -event.dx * ORBIT_SPEED, event.dy * ORBIT_SPEED),
      };
    case "scroll":
      return { ...state, camera: dolly(state.camera, SCROLL_BASE ** event.delta) };
    case "fly":
      return { ...state, camera: fly(state.camera, event.dx, event.dy, event.dz) };
    case "opacity-floor":
      return {
        ...state,
        options: { ...state.options, opacityFloor: Math.min(1, Math.max(0, event.value)) },
      };
    case "point-budget":
      return {
        ...state,
        options: { ...state.options, pointBudget: Math.max(0, Math.floor(event.value)) },
      };
    case "toggle-chunk-bounds":
      return {
        ...state,
        options: { ...state.options, showChunkBounds: !state.options.showChunkBounds },
      };
  }
}
