/**
 * VCT container: the dense binary clip layout shared with the Python side.
 *
 *     magic   4 bytes  "VCT1"
 *     version u32 le   1
 *     T,H,W,C u32 le each
 *     dtype   u32 le   1 = 32-bit IEEE-754 little-endian, 2 = unsigned 8-bit
 *     payload T*H*W*C elements, row-major T -> H -> W -> C
 *
 * dtype 2 stores round-half-even(v*255) and reads back v/255 in float32;
 * dtype 1 round-trips arbitrary float32 values bit-exactly.
 */

export const MAGIC = "VCT1";
export const VERSION = 1;
export const DTYPE_F32 = 1;
export const DTYPE_U8 = 2;
export const HEADER_SIZE = 28;

export interface Clip {
  t: number;
  h: number;
  w: number;
  c: number;
  /** Row-major voxel data, length t*h*w*c. */
  data: Float32Array;
}

export class VctError extends Error {}
export class BadMagic extends VctError {}
export class VersionUnsupported extends VctError {}
export class DimZero extends VctError {}
export class UnsupportedDtype extends VctError {}
export class TruncatedPayload extends VctError {}
export class ValueOutOfRange extends VctError {}
export class ShapeMismatch extends VctError {}

export function makeClip(t: number, h: number, w: number, c: number,
                         data: Float32Array): Clip {
  if (data.length !== t * h * w * c) {
    throw new ShapeMismatch(
      `data length ${data.length} does not match ${t}x${h}x${w}x${c}`,
    );
  }
  return { t, h, w, c, data };
}

/** np.rint semantics: nearest integer, ties to even. */
export function rintHalfEven(x: number): number {
  const floor = Math.floor(x);
  const diff = x - floor;
  if (diff > 0.5) return floor + 1;
  if (diff < 0.5) return floor;
  return floor % 2 === 0 ? floor : floor + 1;
}

export function writeVct(clip: Clip, dtype: number = DTYPE_F32): Uint8Array {
  if (dtype !== DTYPE_F32 && dtype !== DTYPE_U8) {
    throw new UnsupportedDtype(`dtype code ${dtype} not in {1, 2}`);
  }
  const n = clip.data.length;
  const elementSize = dtype === DTYPE_F32 ? 4 : 1;
  const out = new Uint8Array(HEADER_SIZE + n * elementSize);
  const view = new DataView(out.buffer);
  for (let i = 0; i < 4; i++) out[i] = MAGIC.charCodeAt(i);
  view.setUint32(4, VERSION, true);
  view.setUint32(8, clip.t, true);
  view.setUint32(12, clip.h, true);
  view.setUint32(16, clip.w, true);
  view.setUint32(20, clip.c, true);
  view.setUint32(24, dtype, true);
  if (dtype === DTYPE_F32) {
    for (let i = 0; i < n; i++) {
      view.setFloat32(HEADER_SIZE + 4 * i, clip.data[i], true);
    }
  } else {
    for (let i = 0; i < n; i++) {
      const v = clip.data[i];
      if (!Number.isFinite(v) || v < 0 || v > 1) {
        throw new ValueOutOfRange(`dtype 2 requires values in [0,1], found ${v}`);
      }
      out[HEADER_SIZE + i] = rintHalfEven(v * 255);
    }
  }
  return out;
}

export function readVct(bytes: Uint8Array): Clip {
  if (bytes.length < HEADER_SIZE) {
    if (asciiAt(bytes, 0, 4) !== MAGIC) {
      throw new BadMagic(`magic ${asciiAt(bytes, 0, 4)} != ${MAGIC}`);
    }
    throw new TruncatedPayload(
      `file is ${bytes.length} bytes, header needs ${HEADER_SIZE}`,
    );
  }
  const view = new DataView(bytes.buffer, bytes.byteOffset, bytes.byteLength);
  if (asciiAt(bytes, 0, 4) !== MAGIC) {
    throw new BadMagic(`magic ${asciiAt(bytes, 0, 4)} != ${MAGIC}`);
  }
  const version = view.getUint32(4, true);
  if (version !== VERSION) {
    throw new VersionUnsupported(`version ${version} unsupported, expected ${VERSION}`);
  }
  const t = view.getUint32(8, true);
  const h = view.getUint32(12, true);
  const w = view.getUint32(16, true);
  const c = view.getUint32(20, true);
  const dtype = view.getUint32(24, true);
  const names = ["T", "H", "W", "C"];
  [t, h, w, c].forEach((dim, i) => {
    if (dim === 0) throw new DimZero(`dimension ${names[i]} is zero`);
  });
  if (dtype !== DTYPE_F32 && dtype !== DTYPE_U8) {
    throw new UnsupportedDtype(`dtype code ${dtype} not in {1, 2}`);
  }
  const n = t * h * w * c;
  const elementSize = dtype === DTYPE_F32 ? 4 : 1;
  if (bytes.length !== HEADER_SIZE + n * elementSize) {
    throw new TruncatedPayload(
      `payload: file has ${bytes.length - HEADER_SIZE} bytes, ` +
      `header declares ${n * elementSize}`,
    );
  }
  const data = new Float32Array(n);
  if (dtype === DTYPE_F32) {
    for (let i = 0; i < n; i++) {
      data[i] = view.getFloat32(HEADER_SIZE + 4 * i, true);
    }
  } else {
    // Math.fround(u/255) equals float32 division for every u in [0, 255].
    for (let i = 0; i < n; i++) {
      data[i] = Math.fround(bytes[HEADER_SIZE + i] / 255);
    }
  }
  return { t, h, w, c, data };
}

function asciiAt(bytes: Uint8Array, start: number, len: number): string {
  let s = "";
  for (let i = start; i < Math.min(start + len, bytes.length); i++) {
    s += String.fromCharCode(bytes[i]);
  }
  return s;
}
