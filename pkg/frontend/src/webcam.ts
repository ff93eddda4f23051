/**
 * Webcam capture via MediaPipe Tasks: FaceLandmarker for the facial
 * transformation matrix, ImageSegmenter (selfie model) for the head mask.
 *
 * MediaPipe reports the face pose in a GL-style camera frame (+Y up, camera
 * looking down -Z) with translation in centimeters; the service wants its
 * +Y-down +Z-forward frame in meters. Conversion goes through the shared
 * matrices adapter plus a 0.01 scale on the translation column.
 *
 * The .task model files are fetched at runtime; pass URLs that your
 * deployment can actually serve. Everything degrades gracefully: without a
 * segmenter model you still get poses (box-less frames), and any init
 * failure is thrown for the UI to surface so it can fall back to the
 * synthetic driver.
 */

import {
  FaceLandmarker,
  FilesetResolver,
  ImageSegmenter,
} from "@mediapipe/tasks-vision";
import { Matrix4 } from "three";

import type { LandmarkBackend } from "./drivers";
import { threeToService } from "./matrices";

export interface MediapipeUrls {
  wasmRoot: string;
  landmarkerModel: string;
  segmenterModel?: string;
}

export async function createMediapipeBackend(
  urls: MediapipeUrls,
): Promise<LandmarkBackend> {
  const fileset = await FilesetResolver.forVisionTasks(urls.wasmRoot);
  const landmarker = await FaceLandmarker.createFromOptions(fileset, {
    baseOptions: { modelAssetPath: urls.landmarkerModel },
    runningMode: "VIDEO",
    numFaces: 1,
    outputFacialTransformationMatrixes: true,
  });
  let segmenter: ImageSegmenter | null = null;
  if (urls.segmenterModel) {
    segmenter = await ImageSegmenter.createFromOptions(fileset, {
      baseOptions: { modelAssetPath: urls.segmenterModel },
      runningMode: "VIDEO",
      outputCategoryMask: true,
      outputConfidenceMasks: false,
    });
  }

  return {
    detect(video: HTMLVideoElement, tMs: number) {
      const result = landmarker.detectForVideo(video, tMs);
      const mp = result.facialTransformationMatrixes?.[0];
      if (!mp) return { matrix: null };

      const m = new Matrix4().fromArray(mp.data);
      const pose = threeToService(m);
      const el = pose.elements;
      el[12] *= 0.01; // cm -> m
      el[13] *= 0.01;
      el[14] *= 0.01;

      let mask: { data: ArrayLike<number>; w: number; h: number } | undefined;
      if (segmenter) {
        const seg = segmenter.segmentForVideo(video, tMs);
        const category = seg.categoryMask;
        if (category) {
          mask = {
            data: category.getAsUint8Array(),
            w: category.width,
            h: category.height,
          };
          category.close();
        }
        seg.close();
      }
      return { matrix: Array.from(el), mask };
    },
    close() {
      landmarker.close();
      segmenter?.close();
    },
  };
}

export async function openCamera(
  facing: "user" | "environment",
): Promise<MediaStream> {
  return navigator.mediaDevices.getUserMedia({
    video: { facingMode: facing, width: { ideal: 640 }, height: { ideal: 480 } },
    audio: false,
  });
}
