"""Binary glTF (GLB) container parser, geometry only.

Supported subset: GLB 2 container framing, the embedded BIN-chunk buffer,
float32 VEC3 POSITION accessors (optionally strided), u8/u16/u32 triangle
indices, and node-hierarchy transforms (matrix or TRS) baked into the
returned positions.  Materials, skins, animations and extra chunk types are
skipped and reported in ``Mesh.warnings``.  Draco, sparse accessors,
external/data-URI buffers, and quantized attributes are rejected.
"""

from __future__ import annotations

import json
import struct

import numpy as np
from scipy.spatial.transform import Rotation

from .errors import (
    BadMagic,
    MissingPositions,
    TruncatedChunk,
    UnsupportedEncoding,
    UnsupportedVersion,
)
from .mesh import Mesh, mesh_aabb

GLB_MAGIC = 0x46546C67  # "glTF"
CHUNK_JSON = 0x4E4F534A  # "JSON"
CHUNK_BIN = 0x004E4942  # "BIN\0"

_COMPONENT_DTYPES = {
    5121: np.dtype("<u1"),
    5123: np.dtype("<u2"),
    5125: np.dtype("<u4"),
    5126: np.dtype("<f4"),
}
_FLOAT32 = 5126
_MODE_TRIANGLES = 4


def _split_chunks(data: bytes) -> list[tuple[int, bytes]]:
    if len(data) < 12:
        raise TruncatedChunk(f"container header needs 12 bytes, got {len(data)}")
    magic, version, total_len = struct.unpack_from("<III", data, 0)
    if magic != GLB_MAGIC:
        raise BadMagic(f"expected glTF magic 0x{GLB_MAGIC:08X}, got 0x{magic:08X}")
    if version != 2:
        raise UnsupportedVersion(f"GLB container version {version}, only 2 is supported")
    if total_len > len(data):
        raise TruncatedChunk(f"header declares {total_len} bytes but stream has {len(data)}")
    chunks = []
    offset = 12
    while offset < total_len:
        if offset + 8 > total_len:
            raise TruncatedChunk(f"chunk header at {offset} runs past declared length")
        length, ctype = struct.unpack_from("<II", data, offset)
        offset += 8
        if offset + length > total_len:
            raise TruncatedChunk(f"chunk payload of {length} bytes at {offset} runs past declared length")
        chunks.append((ctype, data[offset:offset + length]))
        offset += length
    return chunks


def _node_local_transform(node: dict) -> np.ndarray:
    if "matrix" in node:
        return np.asarray(node["matrix"], dtype=np.float64).reshape(4, 4, order="F")
    m = np.eye(4)
    if "scale" in node:
        m[:3, :3] = np.diag(np.asarray(node["scale"], dtype=np.float64))
    if "rotation" in node:
        # glTF quaternion order is (x, y, z, w), same as scipy
        r = Rotation.from_quat(np.asarray(node["rotation"], dtype=np.float64)).as_matrix()
        m = np.block([[r, np.zeros((3, 1))], [np.zeros((1, 3)), np.ones((1, 1))]]) @ m
    if "translation" in node:
        t = np.eye(4)
        t[:3, 3] = np.asarray(node["translation"], dtype=np.float64)
        m = t @ m
    return m


class _Reader:
    def __init__(self, doc: dict, bin_chunk: bytes | None):
        self.doc = doc
        self.bin = bin_chunk
        self.warnings: list[str] = []

    def accessor_array(self, index: int) -> np.ndarray:
        acc = self.doc["accessors"][index]
        if "sparse" in acc:
            raise UnsupportedEncoding("sparse accessors are not supported")
        if "bufferView" not in acc:
            raise UnsupportedEncoding("accessor without bufferView (zero-filled) not supported")
        view = self.doc["bufferViews"][acc["bufferView"]]
        buffer = self.doc["buffers"][view.get("buffer", 0)]
        if "uri" in buffer:
            raise UnsupportedEncoding("external / data-URI buffers are not supported")
        if self.bin is None:
            raise TruncatedChunk("accessor references the BIN chunk but none is present")
        dtype = _COMPONENT_DTYPES.get(acc["componentType"])
        if dtype is None:
            raise UnsupportedEncoding(f"component type {acc['componentType']} not supported")
        n_comp = {"SCALAR": 1, "VEC2": 2, "VEC3": 3, "VEC4": 4}.get(acc["type"])
        if n_comp is None:
            raise UnsupportedEncoding(f"accessor type {acc['type']} not supported")
        count = int(acc["count"])
        elem_size = dtype.itemsize * n_comp
        start = int(view.get("byteOffset", 0)) + int(acc.get("byteOffset", 0))
        stride = int(view.get("byteStride", 0)) or elem_size
        end = start + (count - 1) * stride + elem_size if count else start
        view_end = int(view.get("byteOffset", 0)) + int(view["byteLength"])
        if end > view_end or end > len(self.bin):
            raise TruncatedChunk(
                f"accessor {index} needs bytes up to {end}, view ends at {view_end}, "
                f"BIN chunk has {len(self.bin)}"
            )
        if stride == elem_size:
            flat = np.frombuffer(self.bin, dtype=dtype, count=count * n_comp, offset=start)
            return flat.reshape(count, n_comp)
        raw = np.frombuffer(self.bin, dtype="<u1", count=(count - 1) * stride + elem_size, offset=start)
        strided = np.lib.stride_tricks.as_strided(raw, shape=(count, elem_size), strides=(stride, 1))
        return np.ascontiguousarray(strided).view(dtype).reshape(count, n_comp)


def _scene_roots(doc: dict) -> list[int]:
    nodes = doc.get("nodes", [])
    scenes = doc.get("scenes")
    if scenes:
        scene_index = doc.get("scene", 0)
        if 0 <= scene_index < len(scenes):
            return list(scenes[scene_index].get("nodes", []))
    # no scene graph: treat nodes that nobody references as roots
    children = {c for n in nodes for c in n.get("children", [])}
    return [i for i in range(len(nodes)) if i not in children]


def parse_glb(data: bytes) -> Mesh:
    """Parse GLB bytes into a single unified Mesh in model space."""
    chunks = _split_chunks(bytes(data))
    if not chunks or chunks[0][0] != CHUNK_JSON:
        raise BadMagic("first chunk must be JSON (0x4E4F534A)")
    try:
        doc = json.loads(chunks[0][1].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise TruncatedChunk(f"JSON chunk does not decode: {exc}") from None
    bin_chunk = next((payload for ctype, payload in chunks[1:] if ctype == CHUNK_BIN), None)

    reader = _Reader(doc, bin_chunk)
    for key in ("materials", "skins", "animations", "textures", "images", "cameras"):
        if doc.get(key):
            reader.warnings.append(f"ignored {len(doc[key])} {key}")

    positions: list[np.ndarray] = []
    triangles: list[np.ndarray] = []
    base = 0

    def emit_mesh(mesh_index: int, world: np.ndarray):
        nonlocal base
        for prim in doc["meshes"][mesh_index].get("primitives", []):
            if "extensions" in prim and "KHR_draco_mesh_compression" in prim["extensions"]:
                raise UnsupportedEncoding("Draco-compressed primitives are not supported")
            attrs = prim.get("attributes", {})
            if "POSITION" not in attrs:
                reader.warnings.append(f"primitive in mesh {mesh_index} has no POSITION")
                continue
            acc = doc["accessors"][attrs["POSITION"]]
            if acc.get("componentType") != _FLOAT32 or acc.get("type") != "VEC3":
                raise UnsupportedEncoding(
                    f"POSITION must be float32 VEC3, got componentType "
                    f"{acc.get('componentType')} type {acc.get('type')}"
                )
            pts = reader.accessor_array(attrs["POSITION"]).astype(np.float64)
            baked = pts @ world[:3, :3].T + world[:3, 3]
            positions.append(baked)
            mode = prim.get("mode", _MODE_TRIANGLES)
            if "indices" in prim:
                if mode == _MODE_TRIANGLES:
                    idx = reader.accessor_array(prim["indices"]).reshape(-1)
                    if len(idx) % 3:
                        reader.warnings.append(
                            f"mesh {mesh_index}: index count {len(idx)} not divisible by 3, dropped"
                        )
                    else:
                        triangles.append(idx.astype(np.int64).reshape(-1, 3) + base)
                else:
                    reader.warnings.append(f"mesh {mesh_index}: non-triangle mode {mode}, indices dropped")
            base += len(baked)

    def walk(node_index: int, parent: np.ndarray, seen: frozenset[int]):
        if node_index in seen:  # defensive: glTF requires a DAG
            return
        node = doc["nodes"][node_index]
        world = parent @ _node_local_transform(node)
        if "mesh" in node:
            emit_mesh(node["mesh"], world)
        for child in node.get("children", []):
            walk(child, world, seen | {node_index})

    if doc.get("nodes"):
        for root in _scene_roots(doc):
            walk(root, np.eye(4), frozenset())
    else:
        for i in range(len(doc.get("meshes", []))):
            emit_mesh(i, np.eye(4))

    if not positions or sum(len(p) for p in positions) == 0:
        raise MissingPositions("no POSITION data found in any reachable primitive")
    all_pos = np.vstack(positions)
    all_tri = np.vstack(triangles).astype(np.int32) if triangles else None
    return Mesh(all_pos, all_tri, node_transform_applied=True, warnings=tuple(reader.warnings))


def glb_info(data: bytes) -> dict:
    """Inspection summary for tooling: counts, AABB, parser warnings."""
    mesh = parse_glb(data)
    doc = json.loads(_split_chunks(bytes(data))[0][1].decode("utf-8"))
    box = mesh_aabb(mesh)
    return {
        "vertex_count": mesh.vertex_count,
        "triangle_count": mesh.triangle_count,
        "primitive_count": sum(len(m.get("primitives", [])) for m in doc.get("meshes", [])),
        "aabb_min": box.min,
        "aabb_max": box.max,
        "warnings": list(mesh.warnings),
    }
