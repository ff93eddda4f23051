"""Pinhole projection math and 4x4 homogeneous transform algebra.

Coordinate conventions, used everywhere in this package:

  Camera frame (right-handed): +X right, +Y down in pixel space, the camera
  looks along +Z; a point is visible when z > 0.  The world frame is taken
  to coincide with the camera frame, so an extrinsic pose maps model-local
  coordinates directly into camera space.

  Image frame: origin top-left, u right, v down, units are pixels with
  sub-pixel precision kept as floats.

Poses are plain 4x4 numpy float64 arrays, row-major in memory.  On every
serialization boundary (session files, wire messages) they travel as a
16-element column-major array; ``pose_to_column_major`` /
``pose_from_column_major`` are the one documented transpose.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy.spatial.transform import Rotation, Slerp

from .errors import BehindCamera, DomainError, Singular

# Depth guard for the perspective division: points with z below this are
# treated as behind the camera.
Z_MIN = 1e-6

# Auto-scale factors are clamped to this range so segmentation dropouts
# cannot produce runaway scales.
SCALE_MIN = 0.25
SCALE_MAX = 4.0

# Default vertical field of view (degrees); mirrors the common WebGL
# perspective-camera default and is configurable everywhere it is used.
DEFAULT_FOV_V_DEG = 50.0


@dataclass(frozen=True)
class CameraIntrinsics:
    """Pinhole parameters: focal lengths and principal point, in pixels."""

    fx: float
    fy: float
    cx: float
    cy: float
    image_w: int
    image_h: int

    def __post_init__(self):
        if not (self.fx > 0 and self.fy > 0):
            raise DomainError(f"focal lengths must be positive, got ({self.fx}, {self.fy})")
        if not (math.isfinite(self.fx) and math.isfinite(self.fy)):
            raise DomainError("focal lengths must be finite")
        if self.image_w < 1 or self.image_h < 1:
            raise DomainError(f"image dimensions must be >= 1, got {self.image_w}x{self.image_h}")
        if not (0 <= self.cx <= self.image_w and 0 <= self.cy <= self.image_h):
            raise DomainError(f"principal point ({self.cx}, {self.cy}) outside the image")


class ScaleFactors(NamedTuple):
    """Per-axis projected-size multipliers (width, height), dimensionless."""

    s_w: float = 1.0
    s_h: float = 1.0


def clamp_scale(s_w: float, s_h: float) -> ScaleFactors:
    return ScaleFactors(
        min(max(s_w, SCALE_MIN), SCALE_MAX),
        min(max(s_h, SCALE_MIN), SCALE_MAX),
    )


@dataclass(frozen=True)
class Rect:
    """Axis-aligned pixel-space box: top-left corner plus width and height.

    Zero-area rects are representable (degenerate) but never negative.
    """

    x: float
    y: float
    w: float
    h: float

    def __post_init__(self):
        if self.w < 0 or self.h < 0:
            raise DomainError(f"rect extents must be non-negative, got w={self.w} h={self.h}")
        if not all(math.isfinite(v) for v in (self.x, self.y, self.w, self.h)):
            raise DomainError("rect fields must be finite")

    @property
    def is_degenerate(self) -> bool:
        return self.w <= 0 or self.h <= 0

    @property
    def area(self) -> float:
        return self.w * self.h

    def scaled(self, sx: float, sy: float) -> "Rect":
        """Scale about the image origin (used to map mask-resolution boxes
        back to full image resolution)."""
        return Rect(self.x * sx, self.y * sy, self.w * sx, self.h * sy)


def intrinsics_from_fov(fov_v_deg: float, image_w: int, image_h: int) -> CameraIntrinsics:
    """Derive square-pixel, centered-principal-point intrinsics from a
    vertical field of view in degrees."""
    if not (0.0 < fov_v_deg < 180.0):
        raise DomainError(f"vertical FOV must be in (0, 180) degrees, got {fov_v_deg}")
    if image_w < 1 or image_h < 1:
        raise DomainError(f"image dimensions must be >= 1, got {image_w}x{image_h}")
    fy = (image_h / 2.0) / math.tan(fov_v_deg * math.pi / 360.0)
    return CameraIntrinsics(fx=fy, fy=fy, cx=image_w / 2.0, cy=image_h / 2.0,
                            image_w=image_w, image_h=image_h)


# --- scalar projection pipeline -----------------------------------------

def normalize(p: Sequence[float]) -> tuple[float, float]:
    """Divide a camera-frame point by its depth: (x/z, y/z)."""
    x, y, z = float(p[0]), float(p[1]), float(p[2])
    if z < Z_MIN:
        raise BehindCamera(f"point depth {z} below z_min={Z_MIN}")
    return (x / z, y / z)


def apply_intrinsics(K: CameraIntrinsics, pn: Sequence[float]) -> tuple[float, float]:
    """Map a normalized point to pixels: (fx*nx + cx, fy*ny + cy)."""
    return (K.fx * pn[0] + K.cx, K.fy * pn[1] + K.cy)


def project_point(K: CameraIntrinsics, p: Sequence[float]) -> tuple[float, float]:
    """Perspective-project a camera-frame point to pixels."""
    return apply_intrinsics(K, normalize(p))


def transform_point(T: np.ndarray, p: Sequence[float]) -> tuple[float, float, float]:
    """Apply a 4x4 homogeneous transform to a 3D point."""
    x, y, z = float(p[0]), float(p[1]), float(p[2])
    return (
        T[0, 0] * x + T[0, 1] * y + T[0, 2] * z + T[0, 3],
        T[1, 0] * x + T[1, 1] * y + T[1, 2] * z + T[1, 3],
        T[2, 0] * x + T[2, 1] * y + T[2, 2] * z + T[2, 3],
    )


def project_point_full(K: CameraIntrinsics, T: np.ndarray, p_world: Sequence[float]) -> tuple[float, float]:
    """Full projection: apply the extrinsic transform, divide by the
    resulting depth, then apply the intrinsics.  With T = identity this is
    exactly ``project_point``."""
    return project_point(K, transform_point(T, p_world))


def project_scaled_about(K: CameraIntrinsics, s: ScaleFactors,
                         anchor: Sequence[float], pn: Sequence[float]) -> tuple[float, float]:
    """Project a normalized point, then scale its pixel offset from
    ``anchor`` by (s_w, s_h).  The anchor is the fixed point of the scaling."""
    u0, v0 = apply_intrinsics(K, pn)
    return (anchor[0] + s[0] * (u0 - anchor[0]),
            anchor[1] + s[1] * (v0 - anchor[1]))


def project_scaled(K: CameraIntrinsics, s: ScaleFactors, pn: Sequence[float]) -> tuple[float, float]:
    """Scaled projection about the principal point: u = fx*s_w*nx + cx.

    Implemented as the anchor-centered form with the anchor at (cx, cy) so
    the two agree bit-for-bit there.
    """
    return project_scaled_about(K, s, (K.cx, K.cy), pn)


# --- 4x4 transform algebra ------------------------------------------------

def identity_pose() -> np.ndarray:
    return np.eye(4)


def translation(x: float, y: float, z: float) -> np.ndarray:
    m = np.eye(4)
    m[0, 3] = x
    m[1, 3] = y
    m[2, 3] = z
    return m


def rot_x(deg: float) -> np.ndarray:
    c, s = math.cos(math.radians(deg)), math.sin(math.radians(deg))
    m = np.eye(4)
    m[1, 1] = c
    m[1, 2] = -s
    m[2, 1] = s
    m[2, 2] = c
    return m


def rot_y(deg: float) -> np.ndarray:
    c, s = math.cos(math.radians(deg)), math.sin(math.radians(deg))
    m = np.eye(4)
    m[0, 0] = c
    m[0, 2] = s
    m[2, 0] = -s
    m[2, 2] = c
    return m


def rot_z(deg: float) -> np.ndarray:
    c, s = math.cos(math.radians(deg)), math.sin(math.radians(deg))
    m = np.eye(4)
    m[0, 0] = c
    m[0, 1] = -s
    m[1, 0] = s
    m[1, 1] = c
    return m


def scaling(sx: float, sy: float, sz: float) -> np.ndarray:
    m = np.eye(4)
    m[0, 0] = sx
    m[1, 1] = sy
    m[2, 2] = sz
    return m


def compose(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix product a @ b (apply b first, then a, on column vectors)."""
    return a @ b


def invert(a: np.ndarray) -> np.ndarray:
    """Invert an affine 4x4 (bottom row (0,0,0,1) assumed; kept exact in
    the result)."""
    block = np.asarray(a, dtype=float)[:3, :3]
    det = np.linalg.det(block)
    if not math.isfinite(det) or abs(det) < 1e-12:
        raise Singular(f"upper-left 3x3 determinant {det} not invertible")
    inv = np.linalg.inv(block)
    out = np.eye(4)
    out[:3, :3] = inv
    out[:3, 3] = -inv @ np.asarray(a, dtype=float)[:3, 3]
    return out


def is_rigid(m: np.ndarray, tol: float = 1e-6) -> bool:
    """True when the pose is a proper rigid transform: affine bottom row
    and an orthonormal, right-handed rotation block within ``tol``."""
    m = np.asarray(m, dtype=float)
    if m.shape != (4, 4) or not np.all(np.isfinite(m)):
        return False
    if not np.allclose(m[3], (0.0, 0.0, 0.0, 1.0), rtol=0.0, atol=1e-9):
        return False
    r = m[:3, :3]
    if not np.allclose(r @ r.T, np.eye(3), rtol=0.0, atol=tol):
        return False
    return float(np.linalg.det(r)) > 0.0


def pose_from_column_major(values: Sequence[float]) -> np.ndarray:
    vals = np.asarray(values, dtype=float)
    if vals.shape != (16,):
        raise DomainError(f"pose array must have 16 entries, got {vals.size}")
    return vals.reshape(4, 4, order="F").copy()


def pose_to_column_major(m: np.ndarray) -> list[float]:
    m = np.asarray(m, dtype=float)
    if m.shape != (4, 4):
        raise DomainError(f"pose must be 4x4, got {m.shape}")
    return [float(v) for v in m.flatten(order="F")]


def blend_pose(last: np.ndarray, target: np.ndarray, alpha: float) -> np.ndarray:
    """Exponential pose blend: translation lerped toward ``target`` with
    weight alpha, rotation interpolated along the shortest arc."""
    if alpha >= 1.0:
        return np.array(target, dtype=float)
    out = np.eye(4)
    out[:3, 3] = (1.0 - alpha) * last[:3, 3] + alpha * target[:3, 3]
    keys = Rotation.from_matrix(np.stack([last[:3, :3], target[:3, :3]]))
    out[:3, :3] = Slerp([0.0, 1.0], keys)(alpha).as_matrix()
    return out
