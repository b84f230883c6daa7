import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";

import {
  CHUNK_SIZE,
  DecodedAsset,
  SplatDecodeError,
  decodeSplat,
} from "../src/decoder.js";

const goldenBytes = new Uint8Array(
  readFileSync(new URL("./fixtures/golden.splat", import.meta.url)),
);

interface Golden {
  count: number;
  chunks: Array<{
    count: number;
    pos_lo: number[];
    pos_hi: number[];
    log_lo: number[];
    log_hi: number[];
  }>;
  positions: number[];
  scales: number[];
  colors: number[];
  opacities: number[];
  rotations: number[];
}

const golden: Golden = JSON.parse(
  readFileSync(new URL("./fixtures/golden.json", import.meta.url), "utf8"),
);

/** |a - b| within a few float32 ulps of the reference value. */
function closeF32(actual: number, reference: number): boolean {
  return Math.abs(actual - reference) <= 2.4e-7 * Math.max(Math.abs(reference), 1e-6);
}

function expectArrayParity(actual: Float32Array, reference: number[], label: string) {
  expect(actual.length).toBe(reference.length);
  for (let i = 0; i < reference.length; i++) {
    if (!closeF32(actual[i]!, reference[i]!)) {
      expect.fail(
        `${label}[${i}] = ${actual[i]} vs reference ${reference[i]}`,
      );
    }
  }
}

describe("golden fixture parity", () => {
  const asset: DecodedAsset = decodeSplat(goldenBytes);

  it("decodes the header count", () => {
    expect(asset.count).toBe(golden.count);
    const header = new DataView(goldenBytes.buffer, goldenBytes.byteOffset);
    expect(asset.count).toBe(header.getUint32(12, true));
  });

  it("chunks match ceil(N / 256) with the stored bounds", () => {
    expect(asset.chunks.length).toBe(Math.ceil(golden.count / CHUNK_SIZE));
    expect(asset.chunks.length).toBe(golden.chunks.length);
    for (let c = 0; c < golden.chunks.length; c++) {
      const ours = asset.chunks[c]!;
      const ref = golden.chunks[c]!;
      expect(ours.count).toBe(ref.count);
      for (let axis = 0; axis < 3; axis++) {
        expect(ours.posLo[axis]).toBe(ref.pos_lo[axis]);
        expect(ours.posHi[axis]).toBe(ref.pos_hi[axis]);
        expect(ours.logLo[axis]).toBe(ref.log_lo[axis]);
        expect(ours.logHi[axis]).toBe(ref.log_hi[axis]);
      }
    }
  });

  it("every attribute matches the reference decoder within float32", () => {
    expectArrayParity(asset.positions, golden.positions, "positions");
    expectArrayParity(asset.scales, golden.scales, "scales");
    expectArrayParity(asset.colors, golden.colors, "colors");
    expectArrayParity(asset.opacities, golden.opacities, "opacities");
    expectArrayParity(asset.rotations, golden.rotations, "rotations");
  });

  it("decoded positions lie within their chunk bounds", () => {
    for (const chunk of asset.chunks) {
      for (let i = 0; i < chunk.count; i++) {
        for (let axis = 0; axis < 3; axis++) {
          const v = asset.positions[(chunk.offset + i) * 3 + axis]!;
          const slack = 1e-6 * Math.max(1, Math.abs(chunk.posLo[axis]!), Math.abs(chunk.posHi[axis]!));
          expect(v).toBeGreaterThanOrEqual(chunk.posLo[axis]! - slack);
          expect(v).toBeLessThanOrEqual(chunk.posHi[axis]! + slack);
        }
      }
    }
  });

  it("decoded rotations are unit quaternions", () => {
    for (let g = 0; g < asset.count; g++) {
      let norm2 = 0;
      for (let k = 0; k < 4; k++) {
        const v = asset.rotations[g * 4 + k]!;
        norm2 += v * v;
      }
      expect(Math.abs(Math.sqrt(norm2) - 1)).toBeLessThanOrEqual(1e-6);
    }
  });

  it("accepts both ArrayBuffer and Uint8Array inputs", () => {
    const buffer = goldenBytes.slice().buffer;
    expect(decodeSplat(buffer).count).toBe(golden.count);
  });
});

describe("corrupt assets are rejected", () => {
  function corrupted(mutate: (bytes: Uint8Array) => Uint8Array | void): Uint8Array {
    const copy = goldenBytes.slice();
    return mutate(copy) ?? copy;
  }

  it("bad magic", () => {
    const bad = corrupted((b) => {
      b.set(new TextEncoder().encode("NOTSPLAT"), 0);
    });
    expect(() => decodeSplat(bad)).toThrowError(/not a splat file/);
    expect(() => decodeSplat(bad)).toThrowError(SplatDecodeError);
  });

  it("unknown version", () => {
    const bad = corrupted((b) => {
      new DataView(b.buffer).setUint32(8, 99, true);
    });
    expect(() => decodeSplat(bad)).toThrowError(/version/);
  });

  it("truncations at several offsets", () => {
    for (const keep of [4, 19, 30, 80, 130, goldenBytes.length - 5]) {
      expect(() => decodeSplat(goldenBytes.slice(0, keep))).toThrowError(
        /truncated|count mismatch/,
      );
    }
  });

  it("trailing bytes", () => {
    const bad = new Uint8Array(goldenBytes.length + 1);
    bad.set(goldenBytes);
    expect(() => decodeSplat(bad)).toThrowError(/trailing/);
  });

  it("header count tampering", () => {
    const bad = corrupted((b) => {
      new DataView(b.buffer).setUint32(12, 9999, true);
    });
    expect(() => decodeSplat(bad)).toThrowError(/count mismatch/);
  });

  it("non-finite chunk bounds", () => {
    const bad = corrupted((b) => {
      new DataView(b.buffer).setFloat64(24, Number.NaN, true);
    });
    expect(() => decodeSplat(bad)).toThrowError(/non-finite/);
  });

  it("rotation index out of range", () => {
    const bad = corrupted((b) => {
      b[b.length - 4] = 7;
    });
    expect(() => decodeSplat(bad)).toThrowError(/index/);
  });

  it("empty buffer", () => {
    expect(() => decodeSplat(new Uint8Array(0))).toThrowError(/truncated/);
  });
});
