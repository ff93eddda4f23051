/**
 * Wire protocol v1 for the headfit session service.
 *
 * One JSON object per WebSocket text message. The client opens with `hello`
 * and then streams `frame` / `set` / `record_start` / `record_stop`; the
 * server answers with `ready`, one `state` per accepted frame, and `err`
 * (fatal errors close the connection).
 *
 * The client never computes registration math: everything rendered comes out
 * of `state` messages.
 */

import { z } from "zod";

export const PROTOCOL_VERSION = 1;

// -- client -> server ---------------------------------------------------------

export interface HelloMsg {
  type: "hello";
  protocol_version: number;
  image_w: number;
  image_h: number;
  fov_v_deg: number;
  model_ref?: string;
  model_glb_b64?: string;
}

export interface RectObj {
  x: number;
  y: number;
  w: number;
  h: number;
}

export interface MaskRleObj {
  w: number;
  h: number;
  runs: number[];
}

export interface FrameMsg {
  type: "frame";
  seq: number;
  t_ms: number;
  /** 16 numbers, column-major. */
  pose: number[];
  box?: RectObj;
  mask_rle?: MaskRleObj;
  dof_label?: string;
  angle_deg?: number | null;
}

/** Fields registration.set_manual accepts; all optional, sent as given. */
export interface SetMsg {
  type: "set";
  visible?: boolean;
  opacity?: number;
  manual_scale?: [number, number, number];
  offset?: number[];
  scale?: [number, number];
  auto_scale_enabled?: boolean;
  auto_scale_once?: boolean;
  smoothing_alpha?: number;
}

export type ClientMsg =
  | HelloMsg
  | FrameMsg
  | SetMsg
  | { type: "record_start"; name: string }
  | { type: "record_stop" };

export function makeHello(
  imageW: number,
  imageH: number,
  fovVDeg: number,
  model?: { ref?: string; glbB64?: string },
): HelloMsg {
  if (model?.ref !== undefined && model?.glbB64 !== undefined) {
    throw new Error("hello takes model_ref or model_glb_b64, not both");
  }
  const msg: HelloMsg = {
    type: "hello",
    protocol_version: PROTOCOL_VERSION,
    image_w: imageW,
    image_h: imageH,
    fov_v_deg: fovVDeg,
  };
  if (model?.ref !== undefined) msg.model_ref = model.ref;
  if (model?.glbB64 !== undefined) msg.model_glb_b64 = model.glbB64;
  return msg;
}

export function makeFrame(
  seq: number,
  tMs: number,
  pose: number[] | Float64Array,
  extras?: Partial<Omit<FrameMsg, "type" | "seq" | "t_ms" | "pose">>,
): FrameMsg {
  const p = Array.from(pose);
  if (p.length !== 16) {
    throw new Error(`pose must hold 16 numbers (${p.length} given)`);
  }
  return { type: "frame", seq, t_ms: tMs, pose: p, ...extras };
}

export function encode(msg: ClientMsg): string {
  return JSON.stringify(msg);
}

// -- server -> client ---------------------------------------------------------

const rectSchema = z.object({
  x: z.number(),
  y: z.number(),
  w: z.number(),
  h: z.number(),
});

const readySchema = z.object({
  type: z.literal("ready"),
  session_id: z.string(),
});

const stateSchema = z.object({
  type: z.literal("state"),
  seq: z.number().int(),
  model_matrix: z.array(z.number()).length(16),
  s_w: z.number(),
  s_h: z.number(),
  anchor: z.tuple([z.number(), z.number()]),
  box_m: rectSchema,
  metrics: z
    .object({
      e_w_pct: z.number(),
      e_h_pct: z.number(),
      iou: z.number(),
    })
    .optional(),
  visible: z.boolean(),
  opacity: z.number(),
});

const errSchema = z.object({
  type: z.literal("err"),
  code: z.string(),
  msg: z.string(),
  fatal: z.boolean(),
});

const serverSchema = z.discriminatedUnion("type", [
  readySchema,
  stateSchema,
  errSchema,
]);

export type ReadyMsg = z.infer<typeof readySchema>;
export type StateMsg = z.infer<typeof stateSchema>;
export type ErrMsg = z.infer<typeof errSchema>;
export type ServerMsg = z.infer<typeof serverSchema>;

/** Parse one server line; throws with a readable message on junk. */
export function decodeServer(text: string): ServerMsg {
  let obj: unknown;
  try {
    obj = JSON.parse(text);
  } catch (e) {
    throw new Error(`server sent invalid JSON: ${(e as Error).message}`);
  }
  const result = serverSchema.safeParse(obj);
  if (!result.success) {
    throw new Error(`unrecognized server message: ${result.error.message}`);
  }
  return result.data;
}
