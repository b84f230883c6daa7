/**
 * Decoder for chunk-quantized .splat assets.
 *
 * Byte-compatible with the Python reader: same header, same per-chunk
 * layout, same dequantization arithmetic (all little-endian). Values are
 * computed in double precision and stored in Float32Arrays for upload, so
 * every attribute matches the reference decoder within float32 rounding.
 *
 * Layout:
 *   header: magic "SPLATCHK" (8 bytes), version u32 = 1,
 *           gaussian count u32, chunk count u32 = ceil(N / 256)
 *   chunk:  count u32 (1..256),
 *           position min/max 6 f64, log-scale min/max 6 f64,
 *           positions count*3 u16, log-scales count*3 u8,
 *           colors count*3 u8, opacities count u8, rotations count*4 u8
 */

export const SPLAT_MAGIC = "SPLATCHK";
export const SPLAT_VERSION = 1;
export const CHUNK_SIZE = 256;

const HEADER_BYTES = 20;
const BOUNDS_BYTES = 96;
const ROT_HALF_RANGE = 1 / Math.sqrt(2);

/** Raised for any malformed asset; the UI shows its message in a banner. */
export class SplatDecodeError extends Error {
  override name = "SplatDecodeError";
}

export interface ChunkBounds {
  /** Gaussians in this chunk (1..256). */
  count: number;
  /** First Gaussian index this chunk covers. */
  offset: number;
  posLo: [number, number, number];
  posHi: [number, number, number];
  logLo: [number, number, number];
  logHi: [number, number, number];
}

export interface DecodedAsset {
  count: number;
  chunks: ChunkBounds[];
  /** N*3 world positions. */
  positions: Float32Array;
  /** N*3 per-axis scales (already exp'd from log-scales). */
  scales: Float32Array;
  /** N*3 colors in [0, 1]. */
  colors: Float32Array;
  /** N opacities in [0, 1]. */
  opacities: Float32Array;
  /** N*4 unit quaternions in w-x-y-z order. */
  rotations: Float32Array;
}

function readBounds(view: DataView, at: number): [number, number, number] {
  return [
    view.getFloat64(at, true),
    view.getFloat64(at + 8, true),
    view.getFloat64(at + 16, true),
  ];
}

function allFinite(v: readonly number[]): boolean {
  return v.every(Number.isFinite);
}

/** lo*(1-u) + hi*u so both endpoints reproduce exactly. */
function dequantize(q: number, lo: number, hi: number, levels: number): number {
  const u = q / levels;
  return lo * (1 - u) + hi * u;
}

function decodeRotation(
  out: Float32Array,
  at: number,
  bytes: Uint8Array,
  src: number,
): void {
  const idx = bytes[src]!;
  if (idx > 3) {
    throw new SplatDecodeError("corrupt rotation: component index out of range");
  }
  const a = ((bytes[src + 1]! - 127) / 127) * ROT_HALF_RANGE;
  const b = ((bytes[src + 2]! - 127) / 127) * ROT_HALF_RANGE;
  const c = ((bytes[src + 3]! - 127) / 127) * ROT_HALF_RANGE;
  const largest = Math.sqrt(Math.max(0, 1 - a * a - b * b - c * c));
  const others = [a, b, c];
  let k = 0;
  for (let component = 0; component < 4; component++) {
    out[at + component] = component === idx ? largest : others[k++]!;
  }
}

/** Parses .splat bytes; throws SplatDecodeError on any malformed input. */
export function decodeSplat(data: ArrayBuffer | Uint8Array): DecodedAsset {
  const bytes =
    data instanceof Uint8Array
      ? data
      : new Uint8Array(data);
  const view = new DataView(bytes.buffer, bytes.byteOffset, bytes.byteLength);

  if (bytes.byteLength < HEADER_BYTES) {
    throw new SplatDecodeError("truncated splat file: missing header");
  }
  const magic = String.fromCharCode(...bytes.subarray(0, 8));
  if (magic !== SPLAT_MAGIC) {
    throw new SplatDecodeError(`bad magic ${JSON.stringify(magic)}; not a splat file`);
  }
  const version = view.getUint32(8, true);
  if (version !== SPLAT_VERSION) {
    throw new SplatDecodeError(`unrecognized splat version ${version}`);
  }
  const total = view.getUint32(12, true);
  const chunkCount = view.getUint32(16, true);
  const expectedChunks = Math.ceil(total / CHUNK_SIZE);
  if (total < 1 || chunkCount !== expectedChunks) {
    throw new SplatDecodeError(
      `header count mismatch: ${total} gaussians need ${expectedChunks} ` +
        `chunks, header says ${chunkCount}`,
    );
  }

  const positions = new Float32Array(total * 3);
  const scales = new Float32Array(total * 3);
  const colors = new Float32Array(total * 3);
  const opacities = new Float32Array(total);
  const rotations = new Float32Array(total * 4);
  const chunks: ChunkBounds[] = [];

  let offset = HEADER_BYTES;
  let decoded = 0;
  for (let c = 0; c < chunkCount; c++) {
    const need = (n: number, what: string) => {
      if (offset + n > bytes.byteLength) {
        throw new SplatDecodeError(`truncated splat file: ${what} cut short`);
      }
    };
    need(4, "chunk header");
    const count = view.getUint32(offset, true);
    offset += 4;
    if (count < 1 || count > CHUNK_SIZE) {
      throw new SplatDecodeError(`chunk count ${count} outside [1, ${CHUNK_SIZE}]`);
    }
    need(BOUNDS_BYTES, "chunk bounds");
    const posLo = readBounds(view, offset);
    const posHi = readBounds(view, offset + 24);
    const logLo = readBounds(view, offset + 48);
    const logHi = readBounds(view, offset + 72);
    offset += BOUNDS_BYTES;
    if (!allFinite(posLo) || !allFinite(posHi) || !allFinite(logLo) || !allFinite(logHi)) {
      throw new SplatDecodeError("non-finite chunk bounds");
    }
    for (let axis = 0; axis < 3; axis++) {
      if (posHi[axis]! < posLo[axis]! || logHi[axis]! < logLo[axis]!) {
        throw new SplatDecodeError("inverted chunk bounds");
      }
    }

    need(count * 6, "positions");
    const posAt = offset;
    offset += count * 6;
    need(count * 3, "log-scales");
    const logAt = offset;
    offset += count * 3;
    need(count * 3, "colors");
    const colAt = offset;
    offset += count * 3;
    need(count, "opacities");
    const opaAt = offset;
    offset += count;
    need(count * 4, "rotations");
    const rotAt = offset;
    offset += count * 4;

    for (let i = 0; i < count; i++) {
      const g = decoded + i;
      for (let axis = 0; axis < 3; axis++) {
        const q = view.getUint16(posAt + (i * 3 + axis) * 2, true);
        positions[g * 3 + axis] = dequantize(q, posLo[axis]!, posHi[axis]!, 65535);
        const ql = bytes[logAt + i * 3 + axis]!;
        scales[g * 3 + axis] = Math.exp(
          dequantize(ql, logLo[axis]!, logHi[axis]!, 255),
        );
        colors[g * 3 + axis] = bytes[colAt + i * 3 + axis]! / 255;
      }
      opacities[g] = bytes[opaAt + i]! / 255;
      decodeRotation(rotations, g * 4, bytes, rotAt + i * 4);
    }
    chunks.push({ count, offset: decoded, posLo, posHi, logLo, logHi });
    decoded += count;
  }

  if (offset !== bytes.byteLength) {
    throw new SplatDecodeError(
      `${bytes.byteLength - offset} trailing bytes after last chunk`,
    );
  }
  if (decoded !== total) {
    throw new SplatDecodeError(
      `chunk counts sum to ${decoded}, header declares ${total}`,
    );
  }
  return { count: total, chunks, positions, scales, colors, opacities, rotations };
}
