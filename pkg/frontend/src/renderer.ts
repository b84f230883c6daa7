/**
 * WebGL2 splat renderer.
 *
 * Draws the visible splats as instanced screen-space ellipses, alpha
 * blended back-to-front with premultiplied colors, plus an optional
 * wireframe overlay of every chunk's position bounds. Sorting runs on
 * the configured frame cadence; camera motion between sorts reuses the
 * last order (approximate by design).
 *
 * The renderer rebuilds itself after a lost WebGL context: the canvas's
 * context-lost event stops drawing, the restore event re-creates every
 * GPU resource from the current viewer state.
 */

import { DecodedAsset } from "./decoder.js";
import {
  cameraPosition,
  projectionMatrix,
  viewMatrix,
} from "./camera.js";
import { depthOrder } from "./sort.js";
import { ViewerState, visibleIndices } from "./state.js";
import { LINE_FRAG, LINE_VERT, SPLAT_FRAG, SPLAT_VERT } from "./shaders.js";

const FLOATS_PER_INSTANCE = 14; // center 3, scale 3, quat 4, color 3, opacity 1

function compile(gl: WebGL2RenderingContext, kind: number, source: string): WebGLShader {
  const shader = gl.createShader(kind);
  if (!shader) {
    throw new Error("failed to create shader");
  }
  gl.shaderSource(shader, source);
  gl.compileShader(shader);
  if (!gl.getShaderParameter(shader, gl.COMPILE_STATUS)) {
    const log = gl.getShaderInfoLog(shader);
    gl.deleteShader(shader);
    throw new Error(`shader compile failed: ${log}`);
  }
  return shader;
}

function link(gl: WebGL2RenderingContext, vert: string, frag: string): WebGLProgram {
  const program = gl.createProgram();
  if (!program) {
    throw new Error("failed to create program");
  }
  gl.attachShader(program, compile(gl, gl.VERTEX_SHADER, vert));
  gl.attachShader(program, compile(gl, gl.FRAGMENT_SHADER, frag));
  gl.linkProgram(program);
  if (!gl.getProgramParameter(program, gl.LINK_STATUS)) {
    throw new Error(`program link failed: ${gl.getProgramInfoLog(program)}`);
  }
  return program;
}

/** 24 box-edge endpoints per chunk, as line-list vertices. */
function chunkBoundsLines(asset: DecodedAsset): Float32Array {
  const edges = [
    [0, 1], [1, 3], [3, 2], [2, 0],
    [4, 5], [5, 7], [7, 6], [6, 4],
    [0, 4], [1, 5], [2, 6], [3, 7],
  ];
  const out = new Float32Array(asset.chunks.length * edges.length * 6);
  let at = 0;
  for (const chunk of asset.chunks) {
    const corner = (mask: number): [number, number, number] => [
      mask & 1 ? chunk.posHi[0] : chunk.posLo[0],
      mask & 2 ? chunk.posHi[1] : chunk.posLo[1],
      mask & 4 ? chunk.posHi[2] : chunk.posLo[2],
    ];
    for (const [a, b] of edges) {
      out.set(corner(a!), at);
      out.set(corner(b!), at + 3);
      at += 6;
    }
  }
  return out;
}

export class SplatRenderer {
  private gl: WebGL2RenderingContext | null = null;
  private splatProgram: WebGLProgram | null = null;
  private lineProgram: WebGLProgram | null = null;
  private quadBuffer: WebGLBuffer | null = null;
  private instanceBuffer: WebGLBuffer | null = null;
  private lineBuffer: WebGLBuffer | null = null;
  private vao: WebGLVertexArrayObject | null = null;
  private lineVao: WebGLVertexArrayObject | null = null;

  private instanceData = new Float32Array(0);
  private instanceCount = 0;
  private lineVertexCount = 0;
  private uploadedAsset: DecodedAsset | null = null;
  private frame = 0;
  private contextLost = false;

  constructor(private canvas: HTMLCanvasElement) {
    canvas.addEventListener("webglcontextlost", (event) => {
      event.preventDefault();
      this.contextLost = true;
    });
    canvas.addEventListener("webglcontextrestored", () => {
      this.contextLost = false;
      this.initContext();
      this.uploadedAsset = null; // force re-upload on the next frame
    });
    this.initContext();
  }

  private initContext(): void {
    const gl = this.canvas.getContext("webgl2", {
      antialias: false,
      alpha: false,
    });
    if (!gl) {
      throw new Error("WebGL2 is not available");
    }
    this.gl = gl;
    this.splatProgram = link(gl, SPLAT_VERT, SPLAT_FRAG);
    this.lineProgram = link(gl, LINE_VERT, LINE_FRAG);

    this.quadBuffer = gl.createBuffer();
    gl.bindBuffer(gl.ARRAY_BUFFER, this.quadBuffer);
    gl.bufferData(
      gl.ARRAY_BUFFER,
      new Float32Array([-1, -1, 1, -1, -1, 1, 1, 1]),
      gl.STATIC_DRAW,
    );
    this.instanceBuffer = gl.createBuffer();
    this.lineBuffer = gl.createBuffer();

    this.vao = gl.createVertexArray();
    gl.bindVertexArray(this.vao);
    gl.bindBuffer(gl.ARRAY_BUFFER, this.quadBuffer);
    gl.enableVertexAttribArray(0);
    gl.vertexAttribPointer(0, 2, gl.FLOAT, false, 0, 0);
    gl.bindBuffer(gl.ARRAY_BUFFER, this.instanceBuffer);
    const stride = FLOATS_PER_INSTANCE * 4;
    const layout: Array<[number, number, number]> = [
      [1, 3, 0],   // center
      [2, 3, 12],  // scale
      [3, 4, 24],  // rotation
      [4, 3, 40],  // color
      [5, 1, 52],  // opacity
    ];
    for (const [location, size, byteOffset] of layout) {
      gl.enableVertexAttribArray(location);
      gl.vertexAttribPointer(location, size, gl.FLOAT, false, stride, byteOffset);
      gl.vertexAttribDivisor(location, 1);
    }
    gl.bindVertexArray(null);

    this.lineVao = gl.createVertexArray();
    gl.bindVertexArray(this.lineVao);
    gl.bindBuffer(gl.ARRAY_BUFFER, this.lineBuffer);
    gl.enableVertexAttribArray(0);
    gl.vertexAttribPointer(0, 3, gl.FLOAT, false, 0, 0);
    gl.bindVertexArray(null);

    gl.disable(gl.DEPTH_TEST);
    gl.enable(gl.BLEND);
    gl.blendFunc(gl.ONE, gl.ONE_MINUS_SRC_ALPHA);
  }

  /** Packs the selected splats, sorted back-to-front, into the GPU buffer. */
  private repack(state: ViewerState): void {
    const { gl } = this;
    const asset = state.asset;
    if (!gl || !asset) {
      return;
    }
    const visible = visibleIndices(asset, state.options);
    const sorted = depthOrder(asset.positions, cameraPosition(state.camera), visible);

    if (this.instanceData.length < sorted.length * FLOATS_PER_INSTANCE) {
      this.instanceData = new Float32Array(sorted.length * FLOATS_PER_INSTANCE);
    }
    const data = this.instanceData;
    for (let i = 0; i < sorted.length; i++) {
      const g = sorted[i]!;
      const at = i * FLOATS_PER_INSTANCE;
      data[at] = asset.positions[g * 3]!;
      data[at + 1] = asset.positions[g * 3 + 1]!;
      data[at + 2] = asset.positions[g * 3 + 2]!;
      data[at + 3] = asset.scales[g * 3]!;
      data[at + 4] = asset.scales[g * 3 + 1]!;
      data[at + 5] = asset.scales[g * 3 + 2]!;
      data[at + 6] = asset.rotations[g * 4]!;
      data[at + 7] = asset.rotations[g * 4 + 1]!;
      data[at + 8] = asset.rotations[g * 4 + 2]!;
      data[at + 9] = asset.rotations[g * 4 + 3]!;
      data[at + 10] = asset.colors[g * 3]!;
      data[at + 11] = asset.colors[g * 3 + 1]!;
      data[at + 12] = asset.colors[g * 3 + 2]!;
      data[at + 13] = asset.opacities[g]!;
    }
    this.instanceCount = sorted.length;
    gl.bindBuffer(gl.ARRAY_BUFFER, this.instanceBuffer);
    gl.bufferData(
      gl.ARRAY_BUFFER,
      data.subarray(0, sorted.length * FLOATS_PER_INSTANCE),
      gl.DYNAMIC_DRAW,
    );
  }

  private uploadLines(asset: DecodedAsset): void {
    const { gl } = this;
    if (!gl) {
      return;
    }
    const lines = chunkBoundsLines(asset);
    this.lineVertexCount = lines.length / 3;
    gl.bindBuffer(gl.ARRAY_BUFFER, this.lineBuffer);
    gl.bufferData(gl.ARRAY_BUFFER, lines, gl.STATIC_DRAW);
  }

  /** Number of splats drawn last frame (for the HUD). */
  get drawnCount(): number {
    return this.instanceCount;
  }

  /**
   * Draws one frame. Re-sorts when the asset changed, options changed
   * the selection, or the sort cadence elapsed.
   */
  draw(state: ViewerState, selectionChanged: boolean): void {
    const { gl } = this;
    if (!gl || this.contextLost) {
      return;
    }
    const width = this.canvas.width;
    const height = this.canvas.height;
    gl.viewport(0, 0, width, height);
    gl.clearColor(0, 0, 0, 1);
    gl.clear(gl.COLOR_BUFFER_BIT);

    const asset = state.asset;
    if (!asset) {
      return;
    }
    if (this.uploadedAsset !== asset) {
      this.uploadedAsset = asset;
      this.uploadLines(asset);
      this.repack(state);
    } else if (selectionChanged || this.frame % Math.max(1, state.options.sortCadence) === 0) {
      this.repack(state);
    }
    this.frame++;

    const view = viewMatrix(state.camera);
    const projection = projectionMatrix(state.camera.fovY, width / height);
    const focalY = height / (2 * Math.tan(state.camera.fovY / 2));

    if (this.instanceCount > 0 && this.splatProgram) {
      gl.useProgram(this.splatProgram);
      gl.uniformMatrix4fv(gl.getUniformLocation(this.splatProgram, "view"), false, view);
      gl.uniformMatrix4fv(
        gl.getUniformLocation(this.splatProgram, "projection"),
        false,
        projection,
      );
      gl.uniform2f(gl.getUniformLocation(this.splatProgram, "viewport"), width, height);
      gl.uniform2f(gl.getUniformLocation(this.splatProgram, "focal"), focalY, focalY);
      gl.bindVertexArray(this.vao);
      gl.drawArraysInstanced(gl.TRIANGLE_STRIP, 0, 4, this.instanceCount);
      gl.bindVertexArray(null);
    }

    if (state.options.showChunkBounds && this.lineVertexCount > 0 && this.lineProgram) {
      gl.useProgram(this.lineProgram);
      gl.uniformMatrix4fv(gl.getUniformLocation(this.lineProgram, "view"), false, view);
      gl.uniformMatrix4fv(
        gl.getUniformLocation(this.lineProgram, "projection"),
        false,
        projection,
      );
      gl.uniform4f(gl.getUniformLocation(this.lineProgram, "lineColor"), 0.3, 1, 0.5, 1);
      gl.bindVertexArray(this.lineVao);
      gl.drawArrays(gl.LINES, 0, this.lineVertexCount);
      gl.bindVertexArray(null);
    }
  }
}
