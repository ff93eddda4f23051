"""Overlay quality metrics.

Compares the projected model boundary B_m against the segmented head
boundary B_i, treated as ground truth.  Reported per frame:

    ratio_w = w_m / w_i        ratio_h = h_m / h_i
    e_w_pct = |ratio_w - 1| * 100
    e_h_pct = |ratio_h - 1| * 100
    iou     = area(B_i intersect B_m) / area(B_i union B_m)

The raw ratios are kept alongside the deviation percentages so tooling can
re-derive either convention.  IoU is closed-form over the axis-aligned
rectangles, no rasterization involved.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BothEmpty, DegenerateGroundTruth, DomainError, EmptyInput
from .geometry import Rect

DOF_LABELS = ("pitch", "yaw", "roll", "static")

_METRIC_FIELDS = ("e_w_pct", "e_h_pct", "iou")


@dataclass(frozen=True)
class MetricsRow:
    seq: int
    dof_label: str
    angle_deg: float
    ratio_w: float
    ratio_h: float
    e_w_pct: float
    e_h_pct: float
    iou: float
    t_ms: float = 0.0

    def __post_init__(self):
        if self.dof_label not in DOF_LABELS:
            raise DomainError(
                f"unknown dof_label {self.dof_label!r}, expected one of {DOF_LABELS}")


def dimension_errors(box_i: Rect, box_m: Rect) -> tuple[float, float, float, float]:
    """Width/height ratios of model over ground truth, plus deviation percents."""
    if box_i.w <= 0.0 or box_i.h <= 0.0:
        raise DegenerateGroundTruth(f"ground-truth box has zero extent: {box_i}")
    ratio_w = box_m.w / box_i.w
    ratio_h = box_m.h / box_i.h
    return ratio_w, ratio_h, abs(ratio_w - 1.0) * 100.0, abs(ratio_h - 1.0) * 100.0


def iou(a: Rect, b: Rect) -> float:
    if a.area == 0.0 and b.area == 0.0:
        raise BothEmpty("both rects have zero area")
    ix = min(a.x + a.w, b.x + b.w) - max(a.x, b.x)
    iy = min(a.y + a.h, b.y + b.h) - max(a.y, b.y)
    if ix <= 0.0 or iy <= 0.0:
        return 0.0
    inter = ix * iy
    return inter / (a.area + b.area - inter)


def make_row(seq: int, dof_label: str, angle_deg: float, box_i: Rect, box_m: Rect,
             t_ms: float = 0.0) -> MetricsRow:
    ratio_w, ratio_h, e_w, e_h = dimension_errors(box_i, box_m)
    return MetricsRow(seq=seq, dof_label=dof_label, angle_deg=angle_deg,
                      ratio_w=ratio_w, ratio_h=ratio_h, e_w_pct=e_w, e_h_pct=e_h,
                      iou=iou(box_i, box_m), t_ms=t_ms)


@dataclass(frozen=True)
class StatSummary:
    mean: float
    std: float  # sample standard deviation, n-1 denominator; 0.0 when n == 1
    n: int


@dataclass(frozen=True)
class AggregateStats:
    """Mean / sample-std per metric, overall and grouped by dof_label."""

    overall: dict[str, StatSummary]
    per_dof: dict[str, dict[str, StatSummary]]
    n_frames: int

    def records(self) -> list[dict]:
        """Flat {metric, dof, mean, std, n} rows, overall first."""
        out = []
        for metric in _METRIC_FIELDS:
            s = self.overall[metric]
            out.append({"metric": metric, "dof": "overall",
                        "mean": s.mean, "std": s.std, "n": s.n})
        for dof in sorted(self.per_dof):
            for metric in _METRIC_FIELDS:
                s = self.per_dof[dof][metric]
                out.append({"metric": metric, "dof": dof,
                            "mean": s.mean, "std": s.std, "n": s.n})
        return out

    def to_json_dict(self) -> dict:
        def block(stats: dict[str, StatSummary]) -> dict:
            return {"e_w": {"mean": stats["e_w_pct"].mean, "std": stats["e_w_pct"].std},
                    "e_h": {"mean": stats["e_h_pct"].mean, "std": stats["e_h_pct"].std},
                    "iou": {"mean": stats["iou"].mean, "std": stats["iou"].std}}

        return {"overall": block(self.overall),
                "per_dof": {dof: block(stats) for dof, stats in sorted(self.per_dof.items())},
                "n_frames": self.n_frames}


def _summarize(values: np.ndarray) -> StatSummary:
    n = int(values.size)
    mean = float(values.mean())
    std = float(values.std(ddof=1)) if n > 1 else 0.0
    return StatSummary(mean=mean, std=std, n=n)


def aggregate(rows: list[MetricsRow]) -> AggregateStats:
    if not rows:
        raise EmptyInput("no metrics rows to aggregate")
    columns = {f: np.array([getattr(r, f) for r in rows], dtype=np.float64)
               for f in _METRIC_FIELDS}
    overall = {f: _summarize(v) for f, v in columns.items()}
    per_dof: dict[str, dict[str, StatSummary]] = {}
    labels = np.array([r.dof_label for r in rows])
    for dof in sorted(set(labels.tolist())):
        sel = labels == dof
        per_dof[dof] = {f: _summarize(v[sel]) for f, v in columns.items()}
    return AggregateStats(overall=overall, per_dof=per_dof, n_frames=len(rows))
