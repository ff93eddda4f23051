"""Per-session registration pipeline.

Owns the mutable state for one tracked session: the loaded model, the
model-to-face offset, the running auto-scale factors, and the manual
overrides.  Each frame: smooth the incoming face pose, project the model's
bounding box about the face anchor, and (when enabled and a head boundary
is available) rescale so the projected box matches the segmented head.

A RegistrationState belongs to exactly one session task; helpers here
mutate it in place and are not safe for concurrent use on the same state.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateModelBox, NoHeadDetected, NonRigidPose, RangeError
from .geometry import (
    CameraIntrinsics,
    Rect,
    ScaleFactors,
    blend_pose,
    clamp_scale,
    compose,
    identity_pose,
    is_rigid,
    project_point,
    scaling,
)
from .mesh import Mesh, project_mesh_bbox
from .segmentation import box_from_rle
from .session import SessionFrame

MODEL_BOX_EPS = 1e-3  # px; smaller projected extents cannot drive Eq. 4-5

_IDENTITY_MANUAL = (1.0, 1.0, 1.0)


@dataclass
class RegistrationState:
    model: Mesh
    offset: np.ndarray = field(default_factory=identity_pose)
    scale: ScaleFactors = ScaleFactors(1.0, 1.0)
    manual_scale: tuple[float, float, float] = _IDENTITY_MANUAL
    opacity: float = 1.0
    visible: bool = True
    auto_scale_enabled: bool = False
    auto_scale_once: bool = False  # one-shot request; cleared on first apply
    smoothing_alpha: float = 1.0
    last_pose: np.ndarray | None = None


@dataclass(frozen=True)
class FrameResult:
    model_matrix: np.ndarray  # pose . offset after smoothing, still rigid
    scale: ScaleFactors
    box_m: Rect
    anchor: tuple[float, float]
    visible: bool
    opacity: float
    box_i: Rect | None = None  # head boundary the frame carried, if any


def update_pose(st: RegistrationState, p_i: np.ndarray) -> np.ndarray:
    """Compose the face pose with the attachment offset, optionally blended
    toward the previous result (exponential smoothing, alpha=1 disables)."""
    if not is_rigid(p_i):
        raise NonRigidPose("input pose is not a rigid transform")
    raw = compose(p_i, st.offset)
    if st.smoothing_alpha >= 1.0 or st.last_pose is None:
        result = raw
    else:
        result = blend_pose(st.last_pose, raw, st.smoothing_alpha)
    st.last_pose = result
    return result


def compute_scale_factors(box_i: Rect, box_m: Rect) -> ScaleFactors:
    if box_m.w <= MODEL_BOX_EPS or box_m.h <= MODEL_BOX_EPS:
        raise DegenerateModelBox(f"projected model box {box_m} too small to scale against")
    return clamp_scale(box_i.w / box_m.w, box_i.h / box_m.h)


def _render_pose(st: RegistrationState, model_matrix: np.ndarray) -> np.ndarray:
    if st.manual_scale == _IDENTITY_MANUAL:
        return model_matrix
    return compose(model_matrix, scaling(*st.manual_scale))


def apply_auto_scale(st: RegistrationState, box_i: Rect, k: CameraIntrinsics,
                     pose: np.ndarray, box_m: Rect | None = None,
                     anchor: tuple[float, float] | None = None) -> RegistrationState:
    """Fold Eq. 4-5 factors into the running scale so the next projection
    matches box_i.  No-op while auto-scaling is off.  box_m/anchor may be
    passed in when the caller already projected this frame."""
    if not (st.auto_scale_enabled or st.auto_scale_once):
        return st
    if anchor is None:
        anchor = project_point(k, (pose[0, 3], pose[1, 3], pose[2, 3]))
    if box_m is None:
        box_m = project_mesh_bbox(k, _render_pose(st, pose), st.scale, anchor, st.model)
    factors = compute_scale_factors(box_i, box_m)
    st.scale = clamp_scale(factors.s_w * st.scale.s_w, factors.s_h * st.scale.s_h)
    st.auto_scale_once = False
    return st


def resolve_box_i(frame: SessionFrame, k: CameraIntrinsics) -> Rect | None:
    """Head boundary from the frame, scaled from mask resolution to image
    pixels when it arrived as an RLE mask.  A well-formed mask with no
    surviving component means no boundary this frame (None), not an error;
    malformed runs still raise RleLengthMismatch.
    """
    if frame.box is not None:
        return frame.box
    if frame.mask_rle is not None:
        try:
            raw = box_from_rle(frame.mask_rle.w, frame.mask_rle.h, frame.mask_rle.runs)
        except NoHeadDetected:
            return None
        return raw.scaled(k.image_w / frame.mask_rle.w, k.image_h / frame.mask_rle.h)
    return None


def step(st: RegistrationState, frame: SessionFrame, k: CameraIntrinsics) -> FrameResult:
    """One frame through the pipeline: smooth pose, project, auto-scale."""
    model_matrix = update_pose(st, frame.pose)
    anchor = project_point(k, (model_matrix[0, 3], model_matrix[1, 3], model_matrix[2, 3]))
    render_pose = _render_pose(st, model_matrix)
    box_m = project_mesh_bbox(k, render_pose, st.scale, anchor, st.model)
    box_i = resolve_box_i(frame, k)
    if box_i is not None and (st.auto_scale_enabled or st.auto_scale_once):
        apply_auto_scale(st, box_i, k, model_matrix, box_m=box_m, anchor=anchor)
        box_m = project_mesh_bbox(k, render_pose, st.scale, anchor, st.model)
    return FrameResult(model_matrix=model_matrix, scale=st.scale, box_m=box_m,
                       anchor=anchor, visible=st.visible, opacity=st.opacity,
                       box_i=box_i)


_SET_FIELDS = ("manual_scale", "offset", "opacity", "visible",
               "auto_scale_enabled", "auto_scale_once", "smoothing_alpha", "scale")


def set_manual(st: RegistrationState, **params) -> RegistrationState:
    """Apply a partial manual-parameter update, validating every field
    before mutating anything."""
    unknown = set(params) - set(_SET_FIELDS)
    if unknown:
        raise RangeError(f"unknown parameters: {sorted(unknown)}")

    validated = {}
    for name, value in params.items():
        validated[name] = _validate_param(name, value)
    for name, value in validated.items():
        setattr(st, name, value)
    return st


def _validate_param(name: str, value):
    if name == "opacity":
        v = _as_real(name, value)
        if not 0.0 <= v <= 1.0:
            raise RangeError(f"opacity must lie in [0, 1], got {v}")
        return v
    if name == "smoothing_alpha":
        v = _as_real(name, value)
        if not 0.0 < v <= 1.0:
            raise RangeError(f"smoothing_alpha must lie in (0, 1], got {v}")
        return v
    if name in ("visible", "auto_scale_enabled", "auto_scale_once"):
        if not isinstance(value, bool):
            raise RangeError(f"{name} must be a boolean, got {value!r}")
        return value
    if name == "manual_scale":
        try:
            sx, sy, sz = (float(v) for v in value)
        except (TypeError, ValueError) as e:
            raise RangeError(f"manual_scale must be 3 reals, got {value!r}") from e
        if sx <= 0.0 or sy <= 0.0 or sz <= 0.0:
            raise RangeError(f"manual_scale must be positive, got {value!r}")
        return (sx, sy, sz)
    if name == "scale":
        try:
            s_w, s_h = (float(v) for v in value)
        except (TypeError, ValueError) as e:
            raise RangeError(f"scale must be 2 reals, got {value!r}") from e
        clamped = clamp_scale(s_w, s_h)
        if (clamped.s_w, clamped.s_h) != (s_w, s_h):
            raise RangeError(f"scale {value!r} outside the clamp range")
        return clamped
    if name == "offset":
        offset = np.asarray(value, dtype=np.float64)
        if offset.shape != (4, 4) or not is_rigid(offset):
            raise RangeError("offset must be a rigid 4x4 transform")
        return offset
    raise RangeError(f"unknown parameter {name!r}")


def _as_real(name: str, value) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise RangeError(f"{name} must be a number, got {value!r}")
    return float(value)
