"""Streaming protocol codec: one JSON object per line (TCP) or per
web-socket text frame, discriminated by a top-level "type" string.

Client messages: hello, frame, set, record_start, record_stop.
Server messages: ready, state, err.

Matrices travel as 16-element column-major arrays, matching the session
file format.  The codec is transport-free; framing and error policy live
in the service.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .errors import MalformedLine
from .evaluation import MetricsRow
from .geometry import Rect, pose_to_column_major
from .registration import FrameResult
from .session import SessionFrame, frame_from_obj, frame_to_obj

PROTOCOL_VERSION = 1

CLIENT_TYPES = ("hello", "frame", "set", "record_start", "record_stop")

# Err codes; fatal errors close the connection after the Err is sent.
NO_HELLO = "NO_HELLO"
UNSUPPORTED_VERSION = "UNSUPPORTED_VERSION"
PARSE = "PARSE"
BAD_POSE = "BAD_POSE"
MODEL_LOAD = "MODEL_LOAD"
INTERNAL = "INTERNAL"


@dataclass(frozen=True)
class Hello:
    image_w: int
    image_h: int
    fov_v_deg: float
    protocol_version: int = PROTOCOL_VERSION
    model_ref: str | None = None
    model_glb_b64: str | None = None


def parse_message(line: str) -> dict:
    """One wire line -> dict with a valid string "type"."""
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as e:
        raise MalformedLine(0, f"invalid JSON: {e.msg}") from e
    if not isinstance(obj, dict):
        raise MalformedLine(0, "message must be a JSON object")
    mtype = obj.get("type")
    if not isinstance(mtype, str):
        raise MalformedLine(0, "message missing string 'type'")
    return obj


def hello_from_obj(obj: dict) -> Hello:
    version = obj.get("protocol_version", PROTOCOL_VERSION)
    if not isinstance(version, int) or isinstance(version, bool):
        raise MalformedLine(0, "protocol_version must be an integer")
    dims = {}
    for key in ("image_w", "image_h"):
        v = obj.get(key)
        if not isinstance(v, int) or isinstance(v, bool) or v < 1:
            raise MalformedLine(0, f"hello needs positive integer {key}")
        dims[key] = v
    fov = obj.get("fov_v_deg")
    if not isinstance(fov, (int, float)) or isinstance(fov, bool) or not 0 < fov < 180:
        raise MalformedLine(0, "hello needs fov_v_deg in (0, 180)")
    ref = obj.get("model_ref")
    blob = obj.get("model_glb_b64")
    if ref is not None and not isinstance(ref, str):
        raise MalformedLine(0, "model_ref must be a string")
    if blob is not None and not isinstance(blob, str):
        raise MalformedLine(0, "model_glb_b64 must be a string")
    if ref is not None and blob is not None:
        raise MalformedLine(0, "hello carries both model_ref and model_glb_b64")
    return Hello(image_w=dims["image_w"], image_h=dims["image_h"], fov_v_deg=float(fov),
                 protocol_version=version, model_ref=ref, model_glb_b64=blob)


def frame_from_message(obj: dict) -> SessionFrame:
    return frame_from_obj(obj)


def encode_frame(frame: SessionFrame) -> str:
    obj = frame_to_obj(frame)
    return json.dumps({"type": "frame", **obj}, separators=(",", ":"), allow_nan=False)


def encode_hello(hello: Hello) -> str:
    obj: dict = {"type": "hello", "protocol_version": hello.protocol_version,
                 "image_w": hello.image_w, "image_h": hello.image_h,
                 "fov_v_deg": hello.fov_v_deg}
    if hello.model_ref is not None:
        obj["model_ref"] = hello.model_ref
    if hello.model_glb_b64 is not None:
        obj["model_glb_b64"] = hello.model_glb_b64
    return json.dumps(obj, separators=(",", ":"), allow_nan=False)


def encode_set(params: dict) -> str:
    return json.dumps({"type": "set", **params}, separators=(",", ":"), allow_nan=False)


def encode_ready(session_id: str) -> str:
    return json.dumps({"type": "ready", "session_id": session_id},
                      separators=(",", ":"))


def encode_err(code: str, msg: str, fatal: bool) -> str:
    return json.dumps({"type": "err", "code": code, "msg": msg, "fatal": fatal},
                      separators=(",", ":"))


def _rect_obj(r: Rect) -> dict:
    return {"x": float(r.x), "y": float(r.y), "w": float(r.w), "h": float(r.h)}


def encode_state(seq: int, result: FrameResult, metrics: MetricsRow | None = None) -> str:
    obj: dict = {
        "type": "state",
        "seq": int(seq),
        "model_matrix": [float(v) for v in pose_to_column_major(result.model_matrix)],
        "s_w": float(result.scale.s_w),
        "s_h": float(result.scale.s_h),
        "anchor": [float(result.anchor[0]), float(result.anchor[1])],
        "box_m": _rect_obj(result.box_m),
    }
    if metrics is not None and not math.isnan(metrics.iou):
        obj["metrics"] = {"e_w_pct": float(metrics.e_w_pct),
                          "e_h_pct": float(metrics.e_h_pct),
                          "iou": float(metrics.iou)}
    obj["visible"] = result.visible
    obj["opacity"] = float(result.opacity)
    return json.dumps(obj, separators=(",", ":"), allow_nan=False)
