"""Triangle-mesh container, its 3D bounds, and its projected 2D bounds.

The projected bounding box is the tight axis-aligned box around the
projected *vertices* (no silhouette rasterization), which makes it exact,
deterministic, and linear under anchor-centered scaling - the property the
auto-scaler relies on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import geometry
from .errors import BehindCamera, DomainError, EmptyMesh
from .geometry import CameraIntrinsics, Rect, ScaleFactors, Z_MIN

# Fixed fallback head used by synthetic sessions and the service's builtin
# model list: ellipsoid semi-axes in world units (x, y, z).
DEFAULT_HEAD_SEMI_AXES = (0.09, 0.12, 0.10)

# Tessellation of the builtin ellipsoid, fixed so projected boxes are
# reproducible everywhere.
ELLIPSOID_SEGMENTS = 32
ELLIPSOID_RINGS = 16


@dataclass(frozen=True)
class Mesh:
    """Point set plus optional triangle indices, in model-local units."""

    positions: np.ndarray  # (N, 3) float64
    indices: np.ndarray | None = None  # (M, 3) int32
    node_transform_applied: bool = True
    warnings: tuple[str, ...] = ()

    def __post_init__(self):
        pos = np.ascontiguousarray(np.asarray(self.positions, dtype=np.float64))
        if pos.ndim != 2 or pos.shape[1] != 3:
            raise DomainError(f"positions must be (N, 3), got {pos.shape}")
        pos.setflags(write=False)
        object.__setattr__(self, "positions", pos)
        if self.indices is not None:
            idx = np.ascontiguousarray(np.asarray(self.indices, dtype=np.int32))
            if idx.ndim != 2 or idx.shape[1] != 3:
                raise DomainError(f"indices must be (M, 3), got {idx.shape}")
            if idx.size and (idx.min() < 0 or idx.max() >= len(pos)):
                raise DomainError("triangle index out of range")
            idx.setflags(write=False)
            object.__setattr__(self, "indices", idx)

    @property
    def vertex_count(self) -> int:
        return len(self.positions)

    @property
    def triangle_count(self) -> int:
        return 0 if self.indices is None else len(self.indices)


@dataclass(frozen=True)
class Box3:
    """3D axis-aligned bounding box."""

    min: tuple[float, float, float]
    max: tuple[float, float, float]

    def __post_init__(self):
        if any(lo > hi for lo, hi in zip(self.min, self.max)):
            raise DomainError(f"AABB min {self.min} exceeds max {self.max}")


def mesh_aabb(m: Mesh) -> Box3:
    if m.vertex_count == 0:
        raise EmptyMesh("cannot take the AABB of an empty mesh")
    lo = m.positions.min(axis=0)
    hi = m.positions.max(axis=0)
    return Box3(tuple(float(v) for v in lo), tuple(float(v) for v in hi))


def project_mesh_bbox(K: CameraIntrinsics, model_pose: np.ndarray, s: ScaleFactors,
                      anchor: tuple[float, float], m: Mesh) -> Rect:
    """Tight pixel-space bounds of all vertices after pose, perspective
    division, and anchor-centered scaling.

    The result is NOT clipped to the image; clipping would make scale
    factors discontinuous at frame edges.

    The elementwise arithmetic mirrors the scalar pipeline in
    ``geometry`` (same operations in the same order) so both paths agree
    to the last bit.  Scaling is applied to the bounds, not the vertices;
    anchor-centered scaling is monotone so the results coincide, and this
    form makes width/height exactly linear in s (w_out = s_w * w_unscaled
    as floats), which the auto-scaler relies on.
    """
    if m.vertex_count == 0:
        raise EmptyMesh("cannot project an empty mesh")
    p = m.positions
    t = np.asarray(model_pose, dtype=np.float64)
    xs = t[0, 0] * p[:, 0] + t[0, 1] * p[:, 1] + t[0, 2] * p[:, 2] + t[0, 3]
    ys = t[1, 0] * p[:, 0] + t[1, 1] * p[:, 1] + t[1, 2] * p[:, 2] + t[1, 3]
    zs = t[2, 0] * p[:, 0] + t[2, 1] * p[:, 1] + t[2, 2] * p[:, 2] + t[2, 3]
    if zs.min() < Z_MIN:
        raise BehindCamera(f"vertex depth {zs.min()} below z_min={Z_MIN}")
    u = K.fx * (xs / zs) + K.cx
    v = K.fy * (ys / zs) + K.cy
    u_min, u_max = float(u.min()), float(u.max())
    v_min, v_max = float(v.min()), float(v.max())
    return Rect(anchor[0] + s[0] * (u_min - anchor[0]),
                anchor[1] + s[1] * (v_min - anchor[1]),
                s[0] * (u_max - u_min),
                s[1] * (v_max - v_min))


# --- builtin meshes ---------------------------------------------------------

def unit_cube() -> Mesh:
    """Axis-aligned cube spanning [-0.5, 0.5]^3, 8 vertices, 12 triangles."""
    corners = np.array(
        [[x, y, z] for x in (-0.5, 0.5) for y in (-0.5, 0.5) for z in (-0.5, 0.5)],
        dtype=np.float64,
    )
    tris = np.array(
        [
            [0, 1, 3], [0, 3, 2],  # x = -0.5
            [4, 6, 7], [4, 7, 5],  # x = +0.5
            [0, 4, 5], [0, 5, 1],  # y = -0.5
            [2, 3, 7], [2, 7, 6],  # y = +0.5
            [0, 2, 6], [0, 6, 4],  # z = -0.5
            [1, 5, 7], [1, 7, 3],  # z = +0.5
        ],
        dtype=np.int32,
    )
    return Mesh(corners, tris)


def ellipsoid(semi_axes: tuple[float, float, float] = DEFAULT_HEAD_SEMI_AXES) -> Mesh:
    """UV-sphere tessellation (ELLIPSOID_SEGMENTS x ELLIPSOID_RINGS) scaled
    by per-axis radii."""
    ax, ay, az = semi_axes
    if not all(a > 0 and math.isfinite(a) for a in (ax, ay, az)):
        raise DomainError(f"semi-axes must be positive finite, got {semi_axes}")
    seg, rings = ELLIPSOID_SEGMENTS, ELLIPSOID_RINGS
    verts = []
    for i in range(rings + 1):
        theta = math.pi * i / rings
        st, ct = math.sin(theta), math.cos(theta)
        for j in range(seg):
            phi = 2.0 * math.pi * j / seg
            verts.append((ax * st * math.cos(phi), ay * ct, az * st * math.sin(phi)))
    tris = []
    for i in range(rings):
        for j in range(seg):
            a = i * seg + j
            b = i * seg + (j + 1) % seg
            c = (i + 1) * seg + j
            d = (i + 1) * seg + (j + 1) % seg
            if i > 0:
                tris.append((a, b, c))
            if i < rings - 1:
                tris.append((b, d, c))
    return Mesh(np.array(verts, dtype=np.float64), np.array(tris, dtype=np.int32))


def head_ellipsoid() -> Mesh:
    return ellipsoid(DEFAULT_HEAD_SEMI_AXES)


def resolve_model_ref(ref: str, base_dir: str | Path | None = None) -> Mesh:
    """Turn a model reference into a Mesh.

    Accepted forms: ``builtin:cube``, ``builtin:head-ellipsoid``,
    ``builtin:ellipsoid:AX,AY,AZ``, or a filesystem path to a .glb file.
    When ``base_dir`` is given, paths are resolved inside it and may not
    escape it (service-facing safety).
    """
    from .glb import parse_glb  # local import; glb depends on this module

    if ref == "builtin:cube":
        return unit_cube()
    if ref == "builtin:head-ellipsoid":
        return head_ellipsoid()
    if ref.startswith("builtin:ellipsoid:"):
        parts = ref.split(":", 2)[2].split(",")
        if len(parts) != 3:
            raise DomainError(f"bad ellipsoid reference {ref!r}")
        try:
            semi = tuple(float(p) for p in parts)
        except ValueError:
            raise DomainError(f"bad ellipsoid reference {ref!r}") from None
        return ellipsoid(semi)
    if ref.startswith("builtin:"):
        raise DomainError(f"unknown builtin model {ref!r}")
    path = Path(ref)
    if base_dir is not None:
        base = Path(base_dir).resolve()
        path = (base / ref).resolve()
        if not path.is_relative_to(base):
            raise DomainError(f"model path {ref!r} escapes the asset directory")
    return parse_glb(path.read_bytes())
