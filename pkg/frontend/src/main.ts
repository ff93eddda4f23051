/**
 * App wiring: session connection, pose driver, render loop, controls.
 *
 * Starts on the synthetic driver so the demo works with no camera and no
 * model downloads; the camera buttons switch to the webcam driver when
 * MediaPipe assets are reachable (see webcam.ts) and fall back with a
 * banner when they are not.
 */

import { SessionConnection } from "./connection";
import { buildControls, showMetrics } from "./controls";
import type { PoseSource } from "./drivers";
import { SyntheticDriver, WebcamDriver } from "./drivers";
import { Overlay } from "./overlay";
import { makeFrame, makeHello } from "./protocol";

const SERVICE_URL = `ws://${location.hostname || "127.0.0.1"}:8765/session`;
const IMAGE_W = 640;
const IMAGE_H = 480;
const FOV_V_DEG = 50;

const video = document.getElementById("video") as HTMLVideoElement;
const glCanvas = document.getElementById("gl") as HTMLCanvasElement;
const boxCanvas = document.getElementById("boxes") as HTMLCanvasElement;
const panel = document.getElementById("panel") as HTMLElement;
const banner = document.getElementById("banner") as HTMLElement;

function note(text: string): void {
  banner.textContent = text;
  banner.style.display = text ? "block" : "none";
}

const overlay = new Overlay(FOV_V_DEG, IMAGE_W, IMAGE_H);
overlay.attach(glCanvas, boxCanvas);

let driver: PoseSource = new SyntheticDriver({
  imageW: IMAGE_W,
  imageH: IMAGE_H,
  fovVDeg: FOV_V_DEG,
});
let stream: MediaStream | null = null;

const connection = new SessionConnection({
  url: SERVICE_URL,
  hello: makeHello(IMAGE_W, IMAGE_H, FOV_V_DEG),
  events: {
    onStatus: (s) => {
      bindings.status.textContent = s;
    },
    onErr: (err) => {
      note(`service error ${err.code}: ${err.msg}${err.fatal ? " (fatal)" : ""}`);
      if (err.code === "MODEL_LOAD") {
        // recoverable by choosing a model that loads; see controls
        connection.rehello(makeHello(IMAGE_W, IMAGE_H, FOV_V_DEG));
        overlay.useBuiltinModel();
      }
    },
    onProblem: (msg) => note(msg),
  },
});

const bindings = buildControls(panel, {
  sendSet: (set) => {
    connection.sendRaw({ type: "set", ...set });
  },
  autoScaleOnce: () => {
    connection.sendRaw({ type: "set", auto_scale_once: true });
  },
  switchCamera: (facing) => {
    void switchToWebcam(facing);
  },
  uploadGlb: (file) => {
    void uploadModel(file);
  },
  selectBuiltin: (ref) => {
    connection.rehello(makeHello(IMAGE_W, IMAGE_H, FOV_V_DEG, { ref }));
    overlay.useBuiltinModel();
  },
  recordStart: (name) => {
    connection.sendRaw({ type: "record_start", name });
  },
  recordStop: () => {
    connection.sendRaw({ type: "record_stop" });
  },
});

async function switchToWebcam(facing: "user" | "environment"): Promise<void> {
  try {
    // MediaPipe (wasm loader and friends) only ships to browsers that ask
    // for the camera, keeping the synthetic-driver bundle small.
    const { createMediapipeBackend, openCamera } = await import("./webcam");
    stream?.getTracks().forEach((t) => t.stop());
    stream = await openCamera(facing);
    video.srcObject = stream;
    await video.play();
    const backend = await createMediapipeBackend({
      wasmRoot: "/mediapipe/wasm",
      landmarkerModel: "/mediapipe/face_landmarker.task",
      segmenterModel: "/mediapipe/selfie_segmenter.task",
    });
    driver.stop();
    driver = new WebcamDriver(video, backend);
    // camera switch means new image dims: re-hello per protocol
    connection.rehello(
      makeHello(video.videoWidth || IMAGE_W, video.videoHeight || IMAGE_H, FOV_V_DEG),
    );
    overlay.setDimensions(
      FOV_V_DEG,
      video.videoWidth || IMAGE_W,
      video.videoHeight || IMAGE_H,
    );
    note("");
  } catch (e) {
    note(`webcam unavailable (${(e as Error).message}); staying on synthetic driver`);
  }
}

async function uploadModel(file: File): Promise<void> {
  const buf = await file.arrayBuffer();
  const b64 = btoa(String.fromCharCode(...new Uint8Array(buf)));
  connection.rehello(makeHello(IMAGE_W, IMAGE_H, FOV_V_DEG, { glbB64: b64 }));
  try {
    await overlay.useGlbModel(buf);
  } catch {
    note("local preview failed to parse the GLB; waiting on the service verdict");
  }
}

const t0 = performance.now();
function tick(): void {
  requestAnimationFrame(tick);
  const tMs = performance.now() - t0;
  if (connection.getStatus() === "streaming") {
    const sample = driver.next(tMs);
    if (sample) {
      connection.sendRaw(
        makeFrame(connection.nextSeq(), tMs, sample.pose, {
          mask_rle: sample.maskRle,
          dof_label: sample.dofLabel,
          angle_deg: sample.angleDeg,
        }),
      );
    }
  }
  const state = connection.latestState();
  if (state) {
    overlay.apply(state);
    showMetrics(bindings.metrics, state.metrics);
    bindings.visible.checked = state.visible;
    bindings.opacity.value = String(state.opacity);
  }
}

connection.connect();
tick();
