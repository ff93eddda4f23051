import { describe, expect, it } from "vitest";

import type { LandmarkBackend } from "../src/drivers";
import { SyntheticDriver, WebcamDriver } from "../src/drivers";
import { rleDecode } from "../src/rle";

function rotationColumns(pose: number[]): number[][] {
  return [pose.slice(0, 3), pose.slice(4, 7), pose.slice(8, 11)];
}

function dot(a: number[], b: number[]): number {
  return a[0]! * b[0]! + a[1]! * b[1]! + a[2]! * b[2]!;
}

describe("SyntheticDriver", () => {
  it("sweeps a deterministic triangle wave", () => {
    const d = new SyntheticDriver({ maxDeg: 30, periodMs: 4000 });
    expect(d.angleAt(0)).toBeCloseTo(-30, 12);
    expect(d.angleAt(1000)).toBeCloseTo(0, 12);
    expect(d.angleAt(2000)).toBeCloseTo(30, 12);
    expect(d.angleAt(3000)).toBeCloseTo(0, 12);
    expect(d.angleAt(123.4)).toBe(d.angleAt(123.4 + 4000));
    for (let t = 0; t < 4000; t += 37) {
      expect(Math.abs(d.angleAt(t))).toBeLessThanOrEqual(30);
    }
  });

  it("emits rigid poses at the configured depth", () => {
    const d = new SyntheticDriver({ dof: "pitch", z0: 0.8, withMask: false });
    const sample = d.next(777);
    const pose = sample.pose;
    expect(pose.slice(12)).toEqual([0, 0, 0.8, 1]);
    expect([pose[3], pose[7], pose[11]]).toEqual([0, 0, 0]);
    const cols = rotationColumns(pose);
    for (let i = 0; i < 3; i++) {
      for (let j = 0; j < 3; j++) {
        expect(dot(cols[i]!, cols[j]!)).toBeCloseTo(i === j ? 1 : 0, 12);
      }
    }
    expect(sample.dofLabel).toBe("pitch");
    expect(sample.maskRle).toBeUndefined();
  });

  it("produces a decodable head mask", () => {
    const d = new SyntheticDriver({ maskSide: 64 });
    const sample = d.next(0);
    const rle = sample.maskRle!;
    expect(rle.w).toBeLessThanOrEqual(256);
    expect(rle.h).toBeLessThanOrEqual(256);
    const mask = rleDecode(rle);
    const fg = mask.reduce((a: number, b) => a + b, 0);
    expect(fg).toBeGreaterThan(0);
    expect(fg).toBeLessThan(mask.length);
    // the blob is centered
    expect(mask[(rle.h / 2) * rle.w + rle.w / 2]).toBe(1);
  });
});

describe("WebcamDriver", () => {
  const video = {} as HTMLVideoElement;

  it("returns null when nothing is detected", () => {
    const backend: LandmarkBackend = {
      detect: () => ({ matrix: null }),
      close: () => {},
    };
    expect(new WebcamDriver(video, backend).next(0)).toBeNull();
  });

  it("passes the matrix through and encodes the mask", () => {
    const matrix = [1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0.01, 0.02, 0.5, 1];
    const backend: LandmarkBackend = {
      detect: () => ({
        matrix,
        mask: { data: [0, 1, 1, 0], w: 2, h: 2 },
      }),
      close: () => {},
    };
    const sample = new WebcamDriver(video, backend).next(10)!;
    expect(sample.pose).toEqual(matrix);
    expect(sample.maskRle).toEqual({ w: 2, h: 2, runs: [1, 2, 1] });
  });

  it("stop releases the backend", () => {
    let closed = false;
    const backend: LandmarkBackend = {
      detect: () => ({ matrix: null }),
      close: () => {
        closed = true;
      },
    };
    const driver = new WebcamDriver(video, backend);
    driver.stop();
    expect(closed).toBe(true);
  });
});
