"""Recorded-session file format and synthetic ground-truth sessions.

File layout: UTF-8 lines, one JSON object each.  Line 1 is the header
(format_version, image_w, image_h, fov_v_deg, model_ref, notes); every
following line is a frame (seq, t_ms, pose, box, mask_rle, dof_label,
angle_deg).  Poses are 16-element column-major arrays.  Reals are written
with Python repr, which round-trips exactly within 17 significant digits.
angle_deg may be NaN (live captures have no ground-truth angle); NaN is
stored as JSON null.  Unknown fields are ignored on read.

Synthetic sessions reproduce a controlled head sweep: frame k of N rotates
the head max_deg*k/(N-1) degrees about one head-local axis at fixed depth
z0, and each frame's segmentation box is the projected bbox of the
ground-truth head ellipsoid at the TRUE (noise-free) pose, so the box is
usable as ground truth downstream.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator, NamedTuple

import numpy as np
from scipy.spatial.transform import Rotation

from .errors import (
    ConfigError,
    DomainError,
    FormatVersionMismatch,
    MalformedLine,
    NonMonotonicSeq,
)
from .evaluation import DOF_LABELS
from .geometry import (
    DEFAULT_FOV_V_DEG,
    CameraIntrinsics,
    Rect,
    ScaleFactors,
    compose,
    intrinsics_from_fov,
    pose_from_column_major,
    pose_to_column_major,
    project_point,
    rot_x,
    rot_y,
    rot_z,
    translation,
)
from .mesh import DEFAULT_HEAD_SEMI_AXES, Mesh, ellipsoid, project_mesh_bbox

FORMAT_VERSION = 1

_MS_PER_FRAME = 1000.0 / 30.0


class MaskRle(NamedTuple):
    w: int
    h: int
    runs: tuple[int, ...]


@dataclass(frozen=True)
class SessionHeader:
    image_w: int = 640
    image_h: int = 480
    fov_v_deg: float = DEFAULT_FOV_V_DEG
    model_ref: str = "builtin:head-ellipsoid"
    notes: str = ""
    format_version: int = FORMAT_VERSION

    def __post_init__(self):
        if self.image_w < 1 or self.image_h < 1:
            raise DomainError(f"image dims must be >= 1, got {self.image_w}x{self.image_h}")
        if not 0.0 < self.fov_v_deg < 180.0:
            raise DomainError(f"fov_v_deg must lie in (0, 180), got {self.fov_v_deg}")

    def intrinsics(self) -> CameraIntrinsics:
        return intrinsics_from_fov(self.fov_v_deg, self.image_w, self.image_h)


@dataclass(frozen=True, eq=False)
class SessionFrame:
    seq: int
    t_ms: float
    pose: np.ndarray  # 4x4 row-major in memory; serialized column-major
    box: Rect | None = None
    mask_rle: MaskRle | None = None
    dof_label: str = "static"
    angle_deg: float = float("nan")

    def __post_init__(self):
        if self.box is not None and self.mask_rle is not None:
            raise DomainError("frame carries both box and mask_rle")
        if self.dof_label not in DOF_LABELS:
            raise DomainError(f"unknown dof_label {self.dof_label!r}")


def header_to_obj(header: SessionHeader) -> dict:
    return {
        "format_version": header.format_version,
        "image_w": header.image_w,
        "image_h": header.image_h,
        "fov_v_deg": float(header.fov_v_deg),
        "model_ref": header.model_ref,
        "notes": header.notes,
    }


def header_from_obj(obj) -> SessionHeader:
    if not isinstance(obj, dict):
        raise MalformedLine(1, "header must be a JSON object")
    version = obj.get("format_version")
    if not isinstance(version, int) or isinstance(version, bool):
        raise MalformedLine(1, "header missing integer format_version")
    if version != FORMAT_VERSION:
        raise FormatVersionMismatch(f"format_version {version}, expected {FORMAT_VERSION}")
    try:
        return SessionHeader(
            image_w=_expect_int(obj, "image_w"),
            image_h=_expect_int(obj, "image_h"),
            fov_v_deg=_expect_real(obj, "fov_v_deg"),
            model_ref=_expect_str(obj, "model_ref"),
            notes=_expect_str(obj, "notes"),
        )
    except DomainError as e:
        raise MalformedLine(1, str(e)) from e


def frame_to_obj(frame: SessionFrame) -> dict:
    obj: dict = {
        "seq": int(frame.seq),
        "t_ms": float(frame.t_ms),
        "pose": [float(v) for v in pose_to_column_major(frame.pose)],
    }
    if frame.box is not None:
        obj["box"] = {"x": float(frame.box.x), "y": float(frame.box.y),
                      "w": float(frame.box.w), "h": float(frame.box.h)}
    if frame.mask_rle is not None:
        obj["mask_rle"] = {"w": int(frame.mask_rle.w), "h": int(frame.mask_rle.h),
                           "runs": [int(r) for r in frame.mask_rle.runs]}
    obj["dof_label"] = frame.dof_label
    angle = float(frame.angle_deg)
    obj["angle_deg"] = None if math.isnan(angle) else angle
    return obj


def frame_from_obj(obj, line_no: int = 0) -> SessionFrame:
    if not isinstance(obj, dict):
        raise MalformedLine(line_no, "frame must be a JSON object")
    try:
        seq = _expect_int(obj, "seq")
        t_ms = _expect_real(obj, "t_ms")
        pose_values = obj.get("pose")
        if (not isinstance(pose_values, list)
                or len(pose_values) != 16
                or any(not _is_real(v) for v in pose_values)):
            n = len(pose_values) if isinstance(pose_values, list) else "no"
            raise MalformedLine(line_no, f"pose must be 16 numbers ({n} given)")
        pose = pose_from_column_major([float(v) for v in pose_values])

        box = None
        if obj.get("box") is not None:
            b = obj["box"]
            if not isinstance(b, dict):
                raise MalformedLine(line_no, "box must be an object")
            box = Rect(_expect_real(b, "x"), _expect_real(b, "y"),
                       _expect_real(b, "w"), _expect_real(b, "h"))

        mask = None
        if obj.get("mask_rle") is not None:
            m = obj["mask_rle"]
            if not isinstance(m, dict):
                raise MalformedLine(line_no, "mask_rle must be an object")
            runs = m.get("runs")
            if not isinstance(runs, list) or any(
                    not isinstance(r, int) or isinstance(r, bool) or r < 0 for r in runs):
                raise MalformedLine(line_no, "mask_rle.runs must be non-negative integers")
            mask = MaskRle(_expect_int(m, "w"), _expect_int(m, "h"), tuple(runs))

        dof_label = obj.get("dof_label", "static")
        raw_angle = obj.get("angle_deg")
        angle = float("nan") if raw_angle is None else raw_angle
        if not _is_real(angle):
            raise MalformedLine(line_no, "angle_deg must be a number or null")
        return SessionFrame(seq=seq, t_ms=t_ms, pose=pose, box=box, mask_rle=mask,
                            dof_label=dof_label, angle_deg=float(angle))
    except MalformedLine:
        raise
    except DomainError as e:
        raise MalformedLine(line_no, str(e)) from e


def _is_real(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _expect_int(obj: dict, key: str) -> int:
    v = obj.get(key)
    if not isinstance(v, int) or isinstance(v, bool):
        raise DomainError(f"{key} must be an integer, got {v!r}")
    return v


def _expect_real(obj: dict, key: str) -> float:
    v = obj.get(key)
    if not _is_real(v):
        raise DomainError(f"{key} must be a number, got {v!r}")
    return float(v)


def _expect_str(obj: dict, key: str) -> str:
    v = obj.get(key)
    if not isinstance(v, str):
        raise DomainError(f"{key} must be a string, got {v!r}")
    return v


def _dump_line(obj: dict) -> str:
    return json.dumps(obj, separators=(",", ":"), allow_nan=False)


def write_session(header: SessionHeader, frames: Iterable[SessionFrame]) -> bytes:
    lines = [_dump_line(header_to_obj(header))]
    last_seq = None
    for frame in frames:
        if last_seq is not None and frame.seq <= last_seq:
            raise NonMonotonicSeq(f"seq {frame.seq} after {last_seq}")
        last_seq = frame.seq
        lines.append(_dump_line(frame_to_obj(frame)))
    return ("\n".join(lines) + "\n").encode("utf-8")


def read_session(data: bytes | IO[bytes]) -> tuple[SessionHeader, Iterator[SessionFrame]]:
    """Parse a session byte stream.  The header is validated eagerly; frames
    are validated lazily as the returned iterator advances."""
    if hasattr(data, "read"):
        data = data.read()
    lines = data.decode("utf-8").splitlines()
    if not lines or not lines[0].strip():
        raise MalformedLine(1, "missing header line")
    header = header_from_obj(_load_line(lines[0], 1))

    def frames() -> Iterator[SessionFrame]:
        last_seq = None
        for i, line in enumerate(lines[1:], start=2):
            if not line.strip():
                continue
            frame = frame_from_obj(_load_line(line, i), i)
            if last_seq is not None and frame.seq <= last_seq:
                raise NonMonotonicSeq(f"line {i}: seq {frame.seq} after {last_seq}")
            last_seq = frame.seq
            yield frame

    return header, frames()


def _load_line(line: str, line_no: int):
    try:
        return json.loads(line)
    except json.JSONDecodeError as e:
        raise MalformedLine(line_no, f"invalid JSON: {e.msg}") from e


def write_session_file(path, header: SessionHeader, frames: Iterable[SessionFrame]) -> None:
    with open(path, "wb") as f:
        f.write(write_session(header, frames))


def read_session_file(path) -> tuple[SessionHeader, Iterator[SessionFrame]]:
    with open(path, "rb") as f:
        return read_session(f.read())


class SessionRecorder:
    """Incremental writer used by the streaming service: header up front,
    frames appended as they arrive."""

    def __init__(self, f: IO[bytes], header: SessionHeader):
        self._f = f
        self._last_seq: int | None = None
        f.write((_dump_line(header_to_obj(header)) + "\n").encode("utf-8"))

    def record(self, frame: SessionFrame) -> None:
        if self._last_seq is not None and frame.seq <= self._last_seq:
            raise NonMonotonicSeq(f"seq {frame.seq} after {self._last_seq}")
        self._last_seq = frame.seq
        self._f.write((_dump_line(frame_to_obj(frame)) + "\n").encode("utf-8"))

    def close(self) -> None:
        self._f.close()


_DOF_ROTATIONS = {"pitch": rot_x, "yaw": rot_y, "roll": rot_z}


@dataclass(frozen=True)
class SynthConfig:
    dof: str = "yaw"  # pitch | yaw | roll | static
    max_deg: float = 45.0
    frames: int = 90
    head: tuple[float, float, float] = DEFAULT_HEAD_SEMI_AXES
    z0: float = 0.5
    noise_rot_deg: float = 0.0
    noise_trans: float = 0.0  # sigma as a fraction of z0
    scale_mismatch: tuple[float, float] = (1.0, 1.0)
    seed: int = 0
    image_w: int = 640
    image_h: int = 480
    fov_v_deg: float = DEFAULT_FOV_V_DEG
    return_sweep: bool = False
    notes: str = ""

    def __post_init__(self):
        if self.dof not in DOF_LABELS:
            raise ConfigError(f"dof must be one of {DOF_LABELS}, got {self.dof!r}")
        if self.frames < 2:
            raise ConfigError(f"frames must be >= 2, got {self.frames}")
        if not 0.0 < self.max_deg < 90.0:
            raise ConfigError(f"max_deg must lie in (0, 90), got {self.max_deg}")
        if any(a <= 0.0 for a in self.head):
            raise ConfigError(f"head semi-axes must be positive, got {self.head}")
        if self.z0 <= 0.0:
            raise ConfigError(f"z0 must be positive, got {self.z0}")
        if self.noise_rot_deg < 0.0 or self.noise_trans < 0.0:
            raise ConfigError("noise sigmas must be >= 0")
        if any(s <= 0.0 for s in self.scale_mismatch):
            raise ConfigError(f"scale_mismatch must be positive, got {self.scale_mismatch}")

    def model_ref(self) -> str:
        sw, sh = self.scale_mismatch
        if (sw, sh) == (1.0, 1.0) and self.head == DEFAULT_HEAD_SEMI_AXES:
            return "builtin:head-ellipsoid"
        ax, ay, az = self.head
        return f"builtin:ellipsoid:{ax * sw!r},{ay * sh!r},{az!r}"

    def angles(self) -> np.ndarray:
        if self.dof == "static":
            return np.zeros(self.frames)
        k = np.arange(self.frames, dtype=np.float64)
        if self.return_sweep:
            return self.max_deg * (1.0 - np.abs(2.0 * k / (self.frames - 1) - 1.0))
        return self.max_deg * k / (self.frames - 1)


def true_pose(cfg: SynthConfig, angle_deg: float) -> np.ndarray:
    """Noise-free pose: head centered at depth z0, rotated about its own
    DOF axis."""
    t = translation(0.0, 0.0, cfg.z0)
    if cfg.dof == "static":
        return t
    return compose(t, _DOF_ROTATIONS[cfg.dof](angle_deg))


def _noisy_pose(pose: np.ndarray, cfg: SynthConfig, rng: np.random.Generator) -> np.ndarray:
    out = pose
    if cfg.noise_rot_deg > 0.0:
        axis = rng.normal(size=3)
        norm = np.linalg.norm(axis)
        if norm < 1e-12:
            axis, norm = np.array([1.0, 0.0, 0.0]), 1.0
        angle = math.radians(rng.normal(0.0, cfg.noise_rot_deg))
        perturb = np.eye(4)
        perturb[:3, :3] = Rotation.from_rotvec(axis / norm * angle).as_matrix()
        out = compose(out, perturb)
    if cfg.noise_trans > 0.0:
        out = out.copy()
        out[:3, 3] += rng.normal(0.0, cfg.noise_trans * cfg.z0, size=3)
    return out


def synth_session(cfg: SynthConfig) -> tuple[SessionHeader, list[SessionFrame]]:
    header = SessionHeader(image_w=cfg.image_w, image_h=cfg.image_h,
                           fov_v_deg=cfg.fov_v_deg, model_ref=cfg.model_ref(),
                           notes=cfg.notes)
    k = header.intrinsics()
    gt_head: Mesh = ellipsoid(cfg.head)
    rng = np.random.default_rng(cfg.seed)
    unit = ScaleFactors(1.0, 1.0)

    frames = []
    for i, angle in enumerate(cfg.angles()):
        pose = true_pose(cfg, float(angle))
        anchor = project_point(k, (pose[0, 3], pose[1, 3], pose[2, 3]))
        box = project_mesh_bbox(k, pose, unit, anchor, gt_head)
        frames.append(SessionFrame(
            seq=i, t_ms=i * _MS_PER_FRAME, pose=_noisy_pose(pose, cfg, rng),
            box=box, dof_label=cfg.dof, angle_deg=float(angle)))
    return header, frames
