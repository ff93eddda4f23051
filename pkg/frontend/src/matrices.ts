/**
 * The one place rendering conventions meet the wire protocol.
 *
 * Service camera frame: +X right, +Y down, +Z forward (camera looks along
 * +Z, z > 0 visible). three.js camera frame: +X right, +Y up, camera looks
 * along -Z. The two frames differ by a 180 degree rotation about X, so the
 * adapter is pre-multiplication by diag(1, -1, -1, 1) - a proper rotation,
 * no mirroring, and its own inverse.
 *
 * Matrices travel as 16-element column-major arrays, which is also
 * three.js's Matrix4.elements layout, so no index shuffling is needed.
 */

import { Matrix4 } from "three";

const FLIP = new Matrix4().makeRotationX(Math.PI);

/** Column-major wire array -> three Matrix4 (still in the service frame). */
export function matrixFromWire(elements: ArrayLike<number>): Matrix4 {
  if (elements.length !== 16) {
    throw new Error(`matrix needs 16 elements (${elements.length} given)`);
  }
  return new Matrix4().fromArray(Array.from(elements));
}

/** three Matrix4 -> column-major wire array. */
export function matrixToWire(m: Matrix4): number[] {
  return m.toArray();
}

/** Service camera frame -> three.js world (and back: it is an involution). */
export function serviceToThree(m: Matrix4): Matrix4 {
  return new Matrix4().multiplyMatrices(FLIP, m);
}

export const threeToService = serviceToThree;

/** Column-major translation-only pose, handy for synthetic driving. */
export function translationPose(x: number, y: number, z: number): number[] {
  return [1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, x, y, z, 1];
}

/**
 * Column-major pose rotating about one camera axis then translating, the
 * same shape the synthetic session generator uses server-side.
 */
export function rotationPose(
  axis: "x" | "y" | "z",
  angleDeg: number,
  t: [number, number, number],
): number[] {
  const m = new Matrix4();
  const a = (angleDeg * Math.PI) / 180;
  if (axis === "x") m.makeRotationX(a);
  else if (axis === "y") m.makeRotationY(a);
  else m.makeRotationZ(a);
  m.setPosition(t[0], t[1], t[2]);
  return m.toArray();
}
