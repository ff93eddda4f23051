/**
 * Pose sources: something that, once per tick, yields a facial pose (and
 * optionally a head mask) to stream to the service.
 *
 * The synthetic driver needs no camera or model downloads and is what the
 * tests and the out-of-the-box demo use: it sweeps the head through yaw /
 * pitch / roll the same way the server's session generator does, and draws
 * a soft ellipse mask roughly where the head projects.
 */

import { rotationPose } from "./matrices";
import type { MaskRleObj } from "./protocol";
import { maskToWire } from "./rle";

export interface PoseSample {
  pose: number[]; // 16, column-major, service camera frame
  maskRle?: MaskRleObj;
  dofLabel?: string;
  angleDeg?: number;
}

export interface PoseSource {
  /** Produce the next sample, or null when nothing was detected this tick. */
  next(tMs: number): PoseSample | null;
  stop(): void;
}

export interface SyntheticOptions {
  dof?: "pitch" | "yaw" | "roll";
  maxDeg?: number;
  /** Sweep period in ms (out and back). */
  periodMs?: number;
  z0?: number;
  /** Emit a procedural head mask with each sample. */
  withMask?: boolean;
  maskSide?: number;
  imageW?: number;
  imageH?: number;
  fovVDeg?: number;
}

const DOF_AXIS = { pitch: "x", yaw: "y", roll: "z" } as const;

export class SyntheticDriver implements PoseSource {
  private readonly dof: "pitch" | "yaw" | "roll";
  private readonly maxDeg: number;
  private readonly periodMs: number;
  private readonly z0: number;
  private readonly withMask: boolean;
  private readonly maskSide: number;
  private readonly imageW: number;
  private readonly imageH: number;
  private readonly fovVDeg: number;

  constructor(opts: SyntheticOptions = {}) {
    this.dof = opts.dof ?? "yaw";
    this.maxDeg = opts.maxDeg ?? 30;
    this.periodMs = opts.periodMs ?? 4000;
    this.z0 = opts.z0 ?? 0.5;
    this.withMask = opts.withMask ?? true;
    this.maskSide = opts.maskSide ?? 128;
    this.imageW = opts.imageW ?? 640;
    this.imageH = opts.imageH ?? 480;
    this.fovVDeg = opts.fovVDeg ?? 50;
  }

  /** Triangle wave in [-maxDeg, maxDeg]; deterministic in tMs. */
  angleAt(tMs: number): number {
    const phase = ((tMs % this.periodMs) + this.periodMs) % this.periodMs;
    const x = phase / this.periodMs; // [0, 1)
    const tri = 1 - Math.abs(4 * x - 2) / 2; // 0 -> 1 -> 0 over half periods
    return this.maxDeg * (2 * tri - 1);
  }

  next(tMs: number): PoseSample {
    const angle = this.angleAt(tMs);
    const pose = rotationPose(DOF_AXIS[this.dof], angle, [0, 0, this.z0]);
    const sample: PoseSample = { pose, dofLabel: this.dof, angleDeg: angle };
    if (this.withMask) {
      sample.maskRle = this.proceduralMask(angle);
    }
    return sample;
  }

  stop(): void {
    // nothing to release
  }

  /**
   * Ellipse around the projected head center, its width modulated slightly
   * with the sweep angle so auto-scale has something to chase.
   */
  private proceduralMask(angleDeg: number): MaskRleObj {
    const side = this.maskSide;
    const fy = this.imageH / 2 / Math.tan(((this.fovVDeg / 2) * Math.PI) / 180);
    // head semi-axes comparable to the builtin model, projected at z0
    const rx = ((0.09 * fy) / this.z0 / this.imageW) * side;
    const ry = ((0.12 * fy) / this.z0 / this.imageH) * side;
    const wobble = 1 + 0.1 * Math.cos((angleDeg * Math.PI) / 180);
    const cx = side / 2;
    const cy = side / 2;
    const mask = new Uint8Array(side * side);
    for (let y = 0; y < side; y++) {
      for (let x = 0; x < side; x++) {
        const dx = (x + 0.5 - cx) / (rx * wobble);
        const dy = (y + 0.5 - cy) / ry;
        if (dx * dx + dy * dy <= 1) mask[y * side + x] = 1;
      }
    }
    return maskToWire(mask, side, side);
  }
}

/**
 * Webcam driver contract. The real implementation wraps the platform's face
 * landmark model (see webcam.ts); this interface keeps the streaming loop
 * and the tests independent of it.
 */
export interface LandmarkBackend {
  /** 16-element column-major facial transformation matrix, or null. */
  detect(video: HTMLVideoElement, tMs: number): {
    matrix: number[] | null;
    mask?: { data: ArrayLike<number>; w: number; h: number };
  };
  close(): void;
}

export class WebcamDriver implements PoseSource {
  constructor(
    private readonly video: HTMLVideoElement,
    private readonly backend: LandmarkBackend,
  ) {}

  next(tMs: number): PoseSample | null {
    const result = this.backend.detect(this.video, tMs);
    if (result.matrix === null) return null;
    const sample: PoseSample = { pose: result.matrix };
    if (result.mask) {
      sample.maskRle = maskToWire(result.mask.data, result.mask.w, result.mask.h);
    }
    return sample;
  }

  stop(): void {
    this.backend.close();
  }
}
