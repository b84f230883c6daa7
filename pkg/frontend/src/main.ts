/**
 * Page wiring: canvas, HUD, controls, and the render loop.
 *
 * Assets load from the file picker, drag-and-drop, or a `?asset=URL`
 * query parameter. The page is a static site; no server logic.
 */

import { SplatRenderer } from "./renderer.js";
import {
  InputEvent,
  ViewerState,
  handleInput,
  initialState,
  loadAsset,
} from "./state.js";

function mustGet<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) {
    throw new Error(`missing #${id}`);
  }
  return el as T;
}

const canvas = mustGet<HTMLCanvasElement>("view");
const hud = mustGet<HTMLDivElement>("hud");
const banner = mustGet<HTMLDivElement>("banner");
const filePicker = mustGet<HTMLInputElement>("file");
const opacitySlider = mustGet<HTMLInputElement>("opacity-floor");
const opacityValue = mustGet<HTMLSpanElement>("opacity-value");
const boundsToggle = mustGet<HTMLInputElement>("chunk-bounds");

let state: ViewerState = initialState();
let selectionChanged = false;
const renderer = new SplatRenderer(canvas);

function dispatch(event: InputEvent): void {
  state = handleInput(state, event);
  if (event.kind === "opacity-floor" || event.kind === "point-budget") {
    selectionChanged = true;
  }
}

function showBytes(data: ArrayBuffer): void {
  state = loadAsset(state, data);
  selectionChanged = true;
  banner.textContent = state.error ?? "";
  banner.style.display = state.error ? "block" : "none";
}

async function loadUrl(url: string): Promise<void> {
  try {
    const response = await fetch(url);
    if (!response.ok) {
      throw new Error(`HTTP ${response.status}`);
    }
    showBytes(await response.arrayBuffer());
  } catch (err) {
    banner.textContent = `failed to fetch ${url}: ${String(err)}`;
    banner.style.display = "block";
  }
}

filePicker.addEventListener("change", () => {
  const file = filePicker.files?.[0];
  if (file) {
    void file.arrayBuffer().then(showBytes);
  }
});

canvas.addEventListener("dragover", (event) => event.preventDefault());
canvas.addEventListener("drop", (event) => {
  event.preventDefault();
  const file = event.dataTransfer?.files?.[0];
  if (file) {
    void file.arrayBuffer().then(showBytes);
  }
});

let dragging = false;
canvas.addEventListener("pointerdown", (event) => {
  dragging = true;
  canvas.setPointerCapture(event.pointerId);
});
canvas.addEventListener("pointerup", () => {
  dragging = false;
});
canvas.addEventListener("pointermove", (event) => {
  if (dragging) {
    dispatch({ kind: "drag", dx: event.movementX, dy: event.movementY });
  }
});
canvas.addEventListener("wheel", (event) => {
  event.preventDefault();
  dispatch({ kind: "scroll", delta: Math.sign(event.deltaY) });
});

const pressed = new Set<string>();
window.addEventListener("keydown", (event) => pressed.add(event.key.toLowerCase()));
window.addEventListener("keyup", (event) => pressed.delete(event.key.toLowerCase()));

opacitySlider.addEventListener("input", () => {
  const value = Number(opacitySlider.value);
  opacityValue.textContent = value.toFixed(2);
  dispatch({ kind: "opacity-floor", value });
});
boundsToggle.addEventListener("change", () => dispatch({ kind: "toggle-chunk-bounds" }));

function flyFromKeys(dt: number): void {
  const step = state.camera.distance * dt;
  let dx = 0;
  let dy = 0;
  let dz = 0;
  if (pressed.has("w")) dz += step;
  if (pressed.has("s")) dz -= step;
  if (pressed.has("d")) dx += step;
  if (pressed.has("a")) dx -= step;
  if (pressed.has("e")) dy += step;
  if (pressed.has("q")) dy -= step;
  if (dx !== 0 || dy !== 0 || dz !== 0) {
    dispatch({ kind: "fly", dx, dy, dz });
  }
}

let lastTime = performance.now();
let fps = 0;

function frame(now: number): void {
  const dt = Math.min(0.1, (now - lastTime) / 1000);
  fps = fps * 0.9 + (dt > 0 ? 0.1 / dt : 0);
  lastTime = now;

  flyFromKeys(dt);
  canvas.width = canvas.clientWidth * devicePixelRatio;
  canvas.height = canvas.clientHeight * devicePixelRatio;
  renderer.draw(state, selectionChanged);
  selectionChanged = false;

  const count = state.asset ? state.asset.count : 0;
  hud.textContent =
    `${count.toLocaleString()} gaussians | ` +
    `${renderer.drawnCount.toLocaleString()} drawn | ${fps.toFixed(0)} fps`;
  requestAnimationFrame(frame);
}

const assetUrl = new URLSearchParams(location.search).get("asset");
if (assetUrl) {
  void loadUrl(assetUrl);
}
requestAnimationFrame(frame);
