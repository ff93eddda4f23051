/**
 * Rendering: a three.js scene for the 3D head model plus a 2D canvas for
 * the boxes and anchor marker.
 *
 * Every transform applied here comes from a State message. The service
 * scales the projected box about the anchor in image space; a perspective
 * renderer cannot reproduce that exactly, so s_w/s_h are applied as a
 * model-space X/Y scale (depth gets their average). At head-sized FOVs the
 * difference is far below a pixel, and all reported numbers still come from
 * the server.
 */

import {
  AmbientLight,
  Color,
  DirectionalLight,
  Group,
  Matrix4,
  Mesh,
  MeshStandardMaterial,
  PerspectiveCamera,
  Scene,
  SphereGeometry,
  WebGLRenderer,
} from "three";
import { GLTFLoader } from "three/examples/jsm/loaders/GLTFLoader.js";

import { matrixFromWire, serviceToThree } from "./matrices";
import type { StateMsg } from "./protocol";

export class Overlay {
  readonly scene = new Scene();
  readonly camera: PerspectiveCamera;
  private renderer: WebGLRenderer | null = null;
  private model: Group = new Group();
  private material = new MeshStandardMaterial({
    color: new Color(0x7fb8d4),
    transparent: true,
    opacity: 1,
    depthWrite: false,
  });
  private boxCanvas: HTMLCanvasElement | null = null;
  private imageW = 640;
  private imageH = 480;

  constructor(fovVDeg: number, imageW: number, imageH: number) {
    this.camera = new PerspectiveCamera(fovVDeg, imageW / imageH, 0.01, 100);
    this.imageW = imageW;
    this.imageH = imageH;
    this.scene.add(new AmbientLight(0xffffff, 0.7));
    const sun = new DirectionalLight(0xffffff, 1.2);
    sun.position.set(0.5, 1, 0.25);
    this.scene.add(sun);
    this.useBuiltinModel();
    this.scene.add(this.model);
  }

  attach(glCanvas: HTMLCanvasElement, boxCanvas: HTMLCanvasElement): void {
    this.renderer = new WebGLRenderer({
      canvas: glCanvas,
      alpha: true,
      antialias: true,
    });
    this.renderer.setSize(this.imageW, this.imageH, false);
    this.boxCanvas = boxCanvas;
    boxCanvas.width = this.imageW;
    boxCanvas.height = this.imageH;
  }

  setDimensions(fovVDeg: number, imageW: number, imageH: number): void {
    this.imageW = imageW;
    this.imageH = imageH;
    this.camera.fov = fovVDeg;
    this.camera.aspect = imageW / imageH;
    this.camera.updateProjectionMatrix();
    this.renderer?.setSize(imageW, imageH, false);
    if (this.boxCanvas) {
      this.boxCanvas.width = imageW;
      this.boxCanvas.height = imageH;
    }
  }

  /** Replace the model with the default head-sized ellipsoid. */
  useBuiltinModel(): void {
    this.model.clear();
    const geom = new SphereGeometry(1, 32, 16);
    geom.scale(0.09, 0.12, 0.1);
    this.model.add(new Mesh(geom, this.material));
  }

  /** Load a user GLB for local display (the server gets it via hello). */
  async useGlbModel(data: ArrayBuffer): Promise<void> {
    const gltf = await new GLTFLoader().parseAsync(data, "");
    this.model.clear();
    gltf.scene.traverse((obj) => {
      const mesh = obj as Mesh;
      if (mesh.isMesh) mesh.material = this.material;
    });
    this.model.add(gltf.scene);
  }

  /** Apply one State and redraw. */
  apply(state: StateMsg): void {
    const pose = serviceToThree(matrixFromWire(state.model_matrix));
    const sAvg = (state.s_w + state.s_h) / 2;
    const scale = new Matrix4().makeScale(state.s_w, state.s_h, sAvg);
    pose.multiply(scale);
    this.model.matrixAutoUpdate = false;
    this.model.matrix.copy(pose);
    this.model.visible = state.visible;
    this.material.opacity = state.opacity;
    this.renderer?.render(this.scene, this.camera);
    this.drawBoxes(state);
  }

  private drawBoxes(state: StateMsg): void {
    const ctx = this.boxCanvas?.getContext("2d");
    if (!ctx) return;
    ctx.clearRect(0, 0, this.imageW, this.imageH);
    if (!state.visible) return;
    ctx.lineWidth = 2;
    ctx.strokeStyle = "#58c470";
    ctx.strokeRect(state.box_m.x, state.box_m.y, state.box_m.w, state.box_m.h);
    ctx.fillStyle = "#e0a23c";
    ctx.beginPath();
    ctx.arc(state.anchor[0], state.anchor[1], 4, 0, 2 * Math.PI);
    ctx.fill();
  }

  render(): void {
    this.renderer?.render(this.scene, this.camera);
  }
}
