"""Overlay-metric tests.

Two independent oracles live here: a pixel-counting IoU (rasterize both rects
onto a grid and count cells) and a two-pass mean/std that never touches the
streaming aggregator.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from headfit.errors import BothEmpty, DegenerateGroundTruth, EmptyInput
from headfit.evaluation import (
    DOF_LABELS,
    MetricsRow,
    StatSummary,
    aggregate,
    dimension_errors,
    iou,
    make_row,
)
from headfit.geometry import Rect


def _raster_iou(a, b, cells=512):
    """Counting oracle on a uniform grid covering both rects."""
    x0 = min(a.x, b.x)
    y0 = min(a.y, b.y)
    x1 = max(a.x + a.w, b.x + b.w)
    y1 = max(a.y + a.h, b.y + b.h)
    xs = np.linspace(x0, x1, cells, endpoint=False) + (x1 - x0) / (2 * cells)
    ys = np.linspace(y0, y1, cells, endpoint=False) + (y1 - y0) / (2 * cells)
    gx, gy = np.meshgrid(xs, ys)
    in_a = (gx >= a.x) & (gx < a.x + a.w) & (gy >= a.y) & (gy < a.y + a.h)
    in_b = (gx >= b.x) & (gx < b.x + b.w) & (gy >= b.y) & (gy < b.y + b.h)
    union = np.count_nonzero(in_a | in_b)
    if union == 0:
        return None
    return np.count_nonzero(in_a & in_b) / union


def test_iou_identical():
    r = Rect(3.0, 4.0, 10.0, 20.0)
    assert iou(r, r) == 1.0


def test_iou_half_overlap_hand_value():
    a = Rect(0.0, 0.0, 10.0, 10.0)
    b = Rect(5.0, 0.0, 10.0, 10.0)
    # intersection 50, union 150
    assert iou(a, b) == pytest.approx(1.0 / 3.0, abs=1e-15)


def test_iou_disjoint_and_touching():
    a = Rect(0.0, 0.0, 10.0, 10.0)
    assert iou(a, Rect(20.0, 0.0, 5.0, 5.0)) == 0.0
    assert iou(a, Rect(10.0, 0.0, 5.0, 5.0)) == 0.0  # shared edge has zero area


def test_iou_containment():
    outer = Rect(0.0, 0.0, 10.0, 10.0)
    inner = Rect(2.0, 2.0, 5.0, 4.0)
    assert iou(outer, inner) == pytest.approx(20.0 / 100.0, abs=1e-15)


def test_iou_both_empty_raises():
    with pytest.raises(BothEmpty):
        iou(Rect(0.0, 0.0, 0.0, 5.0), Rect(1.0, 1.0, 3.0, 0.0))


def test_iou_one_empty_is_zero():
    assert iou(Rect(0.0, 0.0, 0.0, 5.0), Rect(1.0, 1.0, 3.0, 3.0)) == 0.0


def test_iou_matches_raster_oracle():
    rng = np.random.default_rng(31)
    checked = 0
    while checked < 200:
        a = Rect(*rng.uniform(-50, 50, 2), *rng.uniform(1.0, 60.0, 2))
        b = Rect(*rng.uniform(-50, 50, 2), *rng.uniform(1.0, 60.0, 2))
        expected = _raster_iou(a, b)
        if expected is None:
            continue
        assert iou(a, b) == pytest.approx(expected, abs=0.01)
        checked += 1


@given(st.floats(-100, 100), st.floats(-100, 100),
       st.floats(0.5, 50), st.floats(0.5, 50),
       st.floats(-100, 100), st.floats(-100, 100),
       st.floats(0.5, 50), st.floats(0.5, 50))
@settings(max_examples=80, deadline=None)
def test_iou_symmetry_and_range(ax, ay, aw, ah, bx, by, bw, bh):
    a = Rect(ax, ay, aw, ah)
    b = Rect(bx, by, bw, bh)
    v = iou(a, b)
    assert v == iou(b, a)
    assert 0.0 <= v <= 1.0 + 1e-12


@given(st.floats(-20, 20), st.floats(-20, 20))
@settings(max_examples=40, deadline=None)
def test_iou_translation_invariance(dx, dy):
    a = Rect(1.0, 2.0, 8.0, 6.0)
    b = Rect(4.0, 3.0, 5.0, 9.0)
    moved = iou(Rect(a.x + dx, a.y + dy, a.w, a.h), Rect(b.x + dx, b.y + dy, b.w, b.h))
    assert moved == pytest.approx(iou(a, b), abs=1e-12)


@given(st.floats(0.1, 10.0))
@settings(max_examples=40, deadline=None)
def test_iou_scale_invariance(k):
    a = Rect(1.0, 2.0, 8.0, 6.0)
    b = Rect(4.0, 3.0, 5.0, 9.0)
    scaled = iou(Rect(a.x * k, a.y * k, a.w * k, a.h * k),
                 Rect(b.x * k, b.y * k, b.w * k, b.h * k))
    assert scaled == pytest.approx(iou(a, b), abs=1e-9)


# --- dimension errors ----------------------------------------------------------

def test_dimension_errors_hand_value():
    # ratio 0.8991 on width: |0.8991 - 1| * 100 = 10.09
    box_i = Rect(0.0, 0.0, 100.0, 100.0)
    box_m = Rect(0.0, 0.0, 89.91, 100.0)
    ratio_w, ratio_h, e_w, e_h = dimension_errors(box_i, box_m)
    assert ratio_w == pytest.approx(0.8991, abs=1e-12)
    assert e_w == pytest.approx(10.09, abs=1e-9)
    assert ratio_h == 1.0 and e_h == 0.0


def test_dimension_errors_overshoot_symmetric_formula():
    box_i = Rect(0.0, 0.0, 100.0, 100.0)
    box_m = Rect(0.0, 0.0, 120.0, 100.0)
    _, _, e_w, _ = dimension_errors(box_i, box_m)
    assert e_w == pytest.approx(20.0, abs=1e-12)


def test_degenerate_ground_truth():
    with pytest.raises(DegenerateGroundTruth):
        dimension_errors(Rect(0, 0, 0.0, 10), Rect(0, 0, 10, 10))
    with pytest.raises(DegenerateGroundTruth):
        dimension_errors(Rect(0, 0, 10, 0.0), Rect(0, 0, 10, 10))


def test_make_row():
    row = make_row(7, "yaw", 15.0, Rect(0, 0, 100, 100), Rect(0, 0, 90, 110), t_ms=123.0)
    assert row.seq == 7 and row.dof_label == "yaw" and row.t_ms == 123.0
    assert row.ratio_w == pytest.approx(0.9)
    assert row.e_h_pct == pytest.approx(10.0)
    assert 0.0 <= row.iou <= 1.0


def test_metrics_row_rejects_unknown_dof():
    from headfit.errors import DomainError
    with pytest.raises(DomainError):
        MetricsRow(seq=0, dof_label="sideways", angle_deg=0.0, ratio_w=1, ratio_h=1,
                   e_w_pct=0, e_h_pct=0, iou=1)


# --- aggregation -----------------------------------------------------------------

def _row(seq, dof, e_w, e_h, iou_v):
    return MetricsRow(seq=seq, dof_label=dof, angle_deg=float(seq),
                      ratio_w=1 + e_w / 100, ratio_h=1 + e_h / 100,
                      e_w_pct=e_w, e_h_pct=e_h, iou=iou_v)


def test_aggregate_hand_example():
    rows = [_row(0, "yaw", 1.0, 4.0, 0.9),
            _row(1, "yaw", 2.0, 5.0, 0.8),
            _row(2, "yaw", 3.0, 6.0, 0.7)]
    agg = aggregate(rows)
    assert agg.n_frames == 3
    assert agg.overall["e_w_pct"] == StatSummary(2.0, 1.0, 3)  # sample std of {1,2,3}
    assert agg.overall["e_h_pct"].mean == pytest.approx(5.0)
    assert agg.overall["iou"].mean == pytest.approx(0.8)
    assert set(agg.per_dof) == {"yaw"}


def test_aggregate_single_row_std_zero():
    agg = aggregate([_row(0, "roll", 2.5, 2.5, 0.95)])
    assert agg.overall["e_w_pct"].std == 0.0
    assert agg.overall["e_w_pct"].n == 1


def test_aggregate_empty_raises():
    with pytest.raises(EmptyInput):
        aggregate([])


def test_aggregate_matches_two_pass_oracle():
    rng = np.random.default_rng(41)
    rows = []
    for k in range(1000):
        dof = DOF_LABELS[int(rng.integers(0, len(DOF_LABELS)))]
        rows.append(_row(k, dof, float(rng.uniform(0, 30)),
                         float(rng.uniform(0, 30)), float(rng.uniform(0, 1))))
    agg = aggregate(rows)

    def two_pass(values):
        m = sum(values) / len(values)
        if len(values) == 1:
            return m, 0.0
        var = sum((v - m) ** 2 for v in values) / (len(values) - 1)
        return m, math.sqrt(var)

    for field, attr in (("e_w_pct", "e_w_pct"), ("e_h_pct", "e_h_pct"), ("iou", "iou")):
        mean, std = two_pass([getattr(r, attr) for r in rows])
        assert agg.overall[field].mean == pytest.approx(mean, abs=1e-12)
        assert agg.overall[field].std == pytest.approx(std, abs=1e-12)
    for dof in set(r.dof_label for r in rows):
        sub = [r for r in rows if r.dof_label == dof]
        mean, std = two_pass([r.iou for r in sub])
        assert agg.per_dof[dof]["iou"].mean == pytest.approx(mean, abs=1e-12)
        assert agg.per_dof[dof]["iou"].std == pytest.approx(std, abs=1e-12)
        assert agg.per_dof[dof]["iou"].n == len(sub)


def test_to_json_dict_shape():
    agg = aggregate([_row(0, "pitch", 1.0, 2.0, 0.9), _row(1, "pitch", 3.0, 4.0, 0.8)])
    obj = agg.to_json_dict()
    assert obj["n_frames"] == 2
    assert set(obj["overall"]) == {"e_w", "e_h", "iou"}
    assert set(obj["overall"]["e_w"]) == {"mean", "std"}
    assert obj["per_dof"]["pitch"]["e_h"]["mean"] == pytest.approx(3.0)
