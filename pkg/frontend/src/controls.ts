/**
 * Control panel: every interaction becomes exactly one Set message (or a
 * record_start/record_stop), and displayed values update from the next
 * State, never optimistically. Ranges mirror what the service enforces so
 * nothing a user can click produces a server-side RangeError.
 */

import type { SetMsg } from "./protocol";

export interface ControlsCallbacks {
  sendSet: (set: Omit<SetMsg, "type">) => void;
  autoScaleOnce: () => void;
  switchCamera: (facing: "user" | "environment") => void;
  uploadGlb: (file: File) => void;
  selectBuiltin: (ref: string) => void;
  recordStart: (name: string) => void;
  recordStop: () => void;
}

interface Bindings {
  visible: HTMLInputElement;
  opacity: HTMLInputElement;
  scaleW: HTMLInputElement;
  scaleH: HTMLInputElement;
  smoothing: HTMLInputElement;
  autoScale: HTMLInputElement;
  status: HTMLElement;
  metrics: HTMLElement;
}

function row(parent: HTMLElement, label: string): HTMLElement {
  const div = document.createElement("div");
  div.className = "control-row";
  const span = document.createElement("span");
  span.textContent = label;
  div.appendChild(span);
  parent.appendChild(div);
  return div;
}

function slider(
  parent: HTMLElement,
  label: string,
  min: number,
  max: number,
  step: number,
  value: number,
  onInput: (v: number) => void,
): HTMLInputElement {
  const r = row(parent, label);
  const input = document.createElement("input");
  input.type = "range";
  input.min = String(min);
  input.max = String(max);
  input.step = String(step);
  input.value = String(value);
  input.addEventListener("input", () => onInput(Number(input.value)));
  r.appendChild(input);
  return input;
}

function checkbox(
  parent: HTMLElement,
  label: string,
  value: boolean,
  onChange: (v: boolean) => void,
): HTMLInputElement {
  const r = row(parent, label);
  const input = document.createElement("input");
  input.type = "checkbox";
  input.checked = value;
  input.addEventListener("change", () => onChange(input.checked));
  r.appendChild(input);
  return input;
}

function button(parent: HTMLElement, label: string, onClick: () => void): void {
  const b = document.createElement("button");
  b.textContent = label;
  b.addEventListener("click", onClick);
  parent.appendChild(b);
}

export function buildControls(
  root: HTMLElement,
  cb: ControlsCallbacks,
): Bindings {
  const status = document.createElement("div");
  status.className = "status";
  status.textContent = "disconnected";
  root.appendChild(status);

  const visible = checkbox(root, "model visible", true, (v) =>
    cb.sendSet({ visible: v }),
  );
  const opacity = slider(root, "opacity", 0, 1, 0.05, 1, (v) =>
    cb.sendSet({ opacity: v }),
  );
  const scaleW = slider(root, "manual scale X", 0.5, 2, 0.05, 1, (v) =>
    cb.sendSet({ manual_scale: [v, Number(scaleH.value), 1] }),
  );
  const scaleH = slider(root, "manual scale Y", 0.5, 2, 0.05, 1, (v) =>
    cb.sendSet({ manual_scale: [Number(scaleW.value), v, 1] }),
  );
  const smoothing = slider(root, "smoothing alpha", 0.05, 1, 0.05, 1, (v) =>
    cb.sendSet({ smoothing_alpha: v }),
  );
  const autoScale = checkbox(root, "auto-scale continuously", false, (v) =>
    cb.sendSet({ auto_scale_enabled: v }),
  );

  const actions = row(root, "");
  button(actions, "auto-scale once", () => cb.autoScaleOnce());
  button(actions, "front camera", () => cb.switchCamera("user"));
  button(actions, "rear camera", () => cb.switchCamera("environment"));

  const modelRow = row(root, "model");
  const select = document.createElement("select");
  for (const ref of ["builtin:head-ellipsoid", "builtin:cube"]) {
    const opt = document.createElement("option");
    opt.value = ref;
    opt.textContent = ref;
    select.appendChild(opt);
  }
  select.addEventListener("change", () => cb.selectBuiltin(select.value));
  modelRow.appendChild(select);
  const file = document.createElement("input");
  file.type = "file";
  file.accept = ".glb";
  file.addEventListener("change", () => {
    const chosen = file.files?.[0];
    if (chosen) cb.uploadGlb(chosen);
  });
  modelRow.appendChild(file);

  const recordRow = row(root, "record");
  const name = document.createElement("input");
  name.type = "text";
  name.placeholder = "take-name";
  name.value = "take";
  recordRow.appendChild(name);
  button(recordRow, "start", () => cb.recordStart(name.value));
  button(recordRow, "stop", () => cb.recordStop());

  const metrics = document.createElement("div");
  metrics.className = "metrics";
  metrics.textContent = "no metrics yet";
  root.appendChild(metrics);

  return { visible, opacity, scaleW, scaleH, smoothing, autoScale, status, metrics };
}

export function showMetrics(
  el: HTMLElement,
  metrics: { e_w_pct: number; e_h_pct: number; iou: number } | undefined,
): void {
  if (!metrics) {
    el.textContent = "no head boundary this frame";
    return;
  }
  el.textContent =
    `width err ${metrics.e_w_pct.toFixed(2)} %  ` +
    `height err ${metrics.e_h_pct.toFixed(2)} %  ` +
    `IoU ${metrics.iou.toFixed(3)}`;
}
