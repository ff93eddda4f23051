"""headfit: headless real-time head-model registration engine.

Projects a streamed 3D head model through a pinhole camera, auto-scales it
to the segmented head boundary, scores the overlay (width/height error,
IoU), and records/replays sessions over files or a streaming service.
"""

from .errors import HeadfitError
from .evaluation import (
    AggregateStats,
    MetricsRow,
    StatSummary,
    aggregate,
    dimension_errors,
    iou,
    make_row,
)
from .geometry import (
    CameraIntrinsics,
    Rect,
    ScaleFactors,
    blend_pose,
    compose,
    identity_pose,
    intrinsics_from_fov,
    invert,
    is_rigid,
    normalize,
    pose_from_column_major,
    pose_to_column_major,
    project_point,
    project_point_full,
    project_scaled,
    project_scaled_about,
    rot_x,
    rot_y,
    rot_z,
    translation,
)
from .glb import glb_info, parse_glb
from .mesh import (
    Box3,
    Mesh,
    ellipsoid,
    head_ellipsoid,
    mesh_aabb,
    project_mesh_bbox,
    resolve_model_ref,
    unit_cube,
)
from .registration import (
    FrameResult,
    RegistrationState,
    apply_auto_scale,
    compute_scale_factors,
    set_manual,
    step,
    update_pose,
)
from .replay import replay_session, rows_to_csv, run_replay
from .segmentation import SegMask, box_from_rle, mask_to_box, rle_decode, rle_encode
from .session import (
    SessionFrame,
    SessionHeader,
    SessionRecorder,
    SynthConfig,
    read_session,
    read_session_file,
    synth_session,
    write_session,
    write_session_file,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
