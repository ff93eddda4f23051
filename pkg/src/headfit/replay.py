"""Offline session replay: run every recorded frame through the
registration pipeline and evaluate the projected model box against the
frame's head boundary.
"""

from __future__ import annotations

from typing import Iterable, Iterator

from .errors import ConfigError
from .evaluation import AggregateStats, MetricsRow, aggregate, make_row
from .geometry import CameraIntrinsics
from .mesh import Mesh, resolve_model_ref
from .registration import RegistrationState, step
from .session import SessionFrame, SessionHeader, read_session_file

AUTO_SCALE_MODES = ("off", "oneshot", "continuous")

CSV_HEADER = "seq,t_ms,dof_label,angle_deg,ratio_w,ratio_h,e_w_pct,e_h_pct,iou"


def replay_session(header: SessionHeader, frames: Iterable[SessionFrame],
                   model: Mesh | None = None, auto_scale: str = "off",
                   alpha: float = 1.0) -> list[MetricsRow]:
    """Step the pipeline over `frames`; one MetricsRow per frame that
    carried a head boundary.  `model` defaults to the header's model_ref.

    auto_scale: "off" keeps scale (1,1); "oneshot" rescales once at the
    first frame with a boundary; "continuous" rescales every such frame.
    """
    if auto_scale not in AUTO_SCALE_MODES:
        raise ConfigError(f"auto_scale must be one of {AUTO_SCALE_MODES}, got {auto_scale!r}")
    if model is None:
        model = resolve_model_ref(header.model_ref)
    k: CameraIntrinsics = header.intrinsics()
    st = RegistrationState(model=model, smoothing_alpha=alpha)
    if auto_scale == "oneshot":
        st.auto_scale_once = True
    elif auto_scale == "continuous":
        st.auto_scale_enabled = True

    rows = []
    for frame in frames:
        result = step(st, frame, k)
        if result.box_i is not None:
            rows.append(make_row(frame.seq, frame.dof_label, frame.angle_deg,
                                 result.box_i, result.box_m, t_ms=frame.t_ms))
    return rows


def _fmt(v: float) -> str:
    return "%.9g" % v


def rows_to_csv(rows: Iterable[MetricsRow]) -> str:
    """Deterministic CSV: '.' decimal, reals at 9 significant digits."""
    lines = [CSV_HEADER]
    for r in rows:
        lines.append(",".join((
            str(r.seq), _fmt(r.t_ms), r.dof_label, _fmt(r.angle_deg),
            _fmt(r.ratio_w), _fmt(r.ratio_h), _fmt(r.e_w_pct), _fmt(r.e_h_pct),
            _fmt(r.iou))))
    return "\n".join(lines) + "\n"


def run_replay(session_path, model_ref: str | None = None, auto_scale: str = "off",
               alpha: float = 1.0) -> tuple[list[MetricsRow], AggregateStats]:
    """File-to-metrics convenience used by the CLI: read, replay, aggregate."""
    header, frames = read_session_file(session_path)
    model = resolve_model_ref(model_ref) if model_ref is not None else None
    rows = replay_session(header, frames, model=model, auto_scale=auto_scale, alpha=alpha)
    return rows, aggregate(rows)
