/**
 * Background-first run-length encoding for segmentation masks, matching the
 * service's session format: runs alternate background/foreground starting
 * with background, and a mask that opens on foreground gets a zero-length
 * leading background run. Runs always sum to w*h.
 */

import type { MaskRleObj } from "./protocol";

/** Longest mask side sent over the wire; larger inputs get downsampled. */
export const MAX_MASK_SIDE = 256;

/** Encode a row-major binary mask (any array-like of truthy values). */
export function rleEncode(
  mask: ArrayLike<number | boolean>,
  w: number,
  h: number,
): MaskRleObj {
  if (w < 1 || h < 1 || mask.length !== w * h) {
    throw new Error(`mask length ${mask.length} does not match ${w}x${h}`);
  }
  const runs: number[] = [];
  let current = false; // phase starts on background
  let run = 0;
  for (let i = 0; i < mask.length; i++) {
    const v = !!mask[i];
    if (v === current) {
      run++;
    } else {
      runs.push(run);
      current = v;
      run = 1;
    }
  }
  runs.push(run);
  return { w, h, runs };
}

export function rleDecode(rle: MaskRleObj): Uint8Array {
  const total = rle.w * rle.h;
  const out = new Uint8Array(total);
  let pos = 0;
  for (let i = 0; i < rle.runs.length; i++) {
    const run = rle.runs[i]!;
    if (run < 0 || !Number.isInteger(run)) {
      throw new Error(`runs must be non-negative integers, got ${run}`);
    }
    if (i % 2 === 1) out.fill(1, pos, pos + run);
    pos += run;
  }
  if (pos !== total) {
    throw new Error(`runs sum to ${pos}, expected ${rle.w}x${rle.h}=${total}`);
  }
  return out;
}

/**
 * Nearest-neighbour downsample so neither side exceeds `maxSide`, keeping
 * aspect ratio. Returns the input untouched when already small enough.
 */
export function downsampleMask(
  mask: ArrayLike<number | boolean>,
  w: number,
  h: number,
  maxSide: number = MAX_MASK_SIDE,
): { mask: Uint8Array; w: number; h: number } {
  if (w <= maxSide && h <= maxSide) {
    const copy = new Uint8Array(w * h);
    for (let i = 0; i < copy.length; i++) copy[i] = mask[i] ? 1 : 0;
    return { mask: copy, w, h };
  }
  const scale = maxSide / Math.max(w, h);
  const ow = Math.max(1, Math.round(w * scale));
  const oh = Math.max(1, Math.round(h * scale));
  const out = new Uint8Array(ow * oh);
  for (let y = 0; y < oh; y++) {
    const sy = Math.min(h - 1, Math.floor(((y + 0.5) * h) / oh));
    for (let x = 0; x < ow; x++) {
      const sx = Math.min(w - 1, Math.floor(((x + 0.5) * w) / ow));
      out[y * ow + x] = mask[sy * w + sx] ? 1 : 0;
    }
  }
  return { mask: out, w: ow, h: oh };
}

/** Convenience: downsample if needed, then encode. */
export function maskToWire(
  mask: ArrayLike<number | boolean>,
  w: number,
  h: number,
  maxSide: number = MAX_MASK_SIDE,
): MaskRleObj {
  const d = downsampleMask(mask, w, h, maxSide);
  return rleEncode(d.mask, d.w, d.h);
}
