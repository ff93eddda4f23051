"""Registration pipeline tests.

Eq. 4-5 style scale recovery has a simple fixed-point structure: after one
application the projected box must coincide with the target, and reapplying
must change nothing.  Both are checked, plus the hand-computed factor values.
"""

import numpy as np
import pytest

from headfit.errors import DegenerateModelBox, NonRigidPose, RangeError
from headfit.geometry import (
    Rect,
    SCALE_MAX,
    SCALE_MIN,
    ScaleFactors,
    compose,
    identity_pose,
    intrinsics_from_fov,
    project_point,
    rot_z,
    translation,
)
from headfit.mesh import head_ellipsoid, project_mesh_bbox, unit_cube
from headfit.registration import (
    MODEL_BOX_EPS,
    FrameResult,
    RegistrationState,
    apply_auto_scale,
    compute_scale_factors,
    resolve_box_i,
    set_manual,
    step,
    update_pose,
)
from headfit.session import MaskRle, SessionFrame

K = intrinsics_from_fov(50.0, 640, 480)


def _state(**kw):
    return RegistrationState(model=head_ellipsoid(), **kw)


def _frame(pose, **kw):
    return SessionFrame(seq=kw.pop("seq", 0), t_ms=kw.pop("t_ms", 0.0), pose=pose, **kw)


# --- pose update -----------------------------------------------------------------

def test_update_pose_alpha_one_is_passthrough():
    st = _state()
    pose = compose(translation(0.01, -0.02, 0.6), rot_z(12.0))
    out = update_pose(st, pose)
    assert (out == pose).all()
    assert (st.last_pose == pose).all()


def test_update_pose_composes_offset():
    off = translation(0.0, 0.05, 0.0)
    st = _state(offset=off)
    pose = translation(0.0, 0.0, 0.5)
    out = update_pose(st, pose)
    assert np.allclose(out, compose(pose, off), atol=1e-15)
    assert np.allclose(out[:3, 3], (0.0, 0.05, 0.5), atol=1e-15)


def test_update_pose_smoothing_halfway():
    st = _state(smoothing_alpha=0.5)
    update_pose(st, translation(0.0, 0.0, 1.0))
    out = update_pose(st, translation(1.0, 0.0, 1.0))
    # translation lerps: halfway between 0 and 1 on x
    assert out[0, 3] == pytest.approx(0.5, abs=1e-12)
    assert out[2, 3] == pytest.approx(1.0, abs=1e-12)


def test_update_pose_rejects_non_rigid():
    st = _state()
    bad = identity_pose()
    bad[0, 0] = 2.0
    with pytest.raises(NonRigidPose):
        update_pose(st, bad)


# --- scale factors ----------------------------------------------------------------

def test_compute_scale_factors_hand_values():
    s = compute_scale_factors(Rect(0, 0, 120.0, 90.0), Rect(0, 0, 100.0, 100.0))
    assert s.s_w == pytest.approx(1.2, abs=1e-15)
    assert s.s_h == pytest.approx(0.9, abs=1e-15)


def test_compute_scale_factors_clamped():
    s = compute_scale_factors(Rect(0, 0, 1000.0, 1.0), Rect(0, 0, 100.0, 100.0))
    assert s.s_w == SCALE_MAX
    assert s.s_h == SCALE_MIN


def test_compute_scale_factors_degenerate_model_box():
    with pytest.raises(DegenerateModelBox):
        compute_scale_factors(Rect(0, 0, 100, 100), Rect(0, 0, MODEL_BOX_EPS / 2, 100))


def test_apply_auto_scale_noop_when_disabled():
    st = _state()
    before = st.scale
    apply_auto_scale(st, Rect(0, 0, 200, 200), K, translation(0, 0, 0.5))
    assert st.scale == before


def test_apply_auto_scale_reaches_target_and_is_idempotent():
    st = _state(auto_scale_enabled=True)
    pose = translation(0.0, 0.0, 0.5)
    anchor = project_point(K, (0.0, 0.0, 0.5))
    target = Rect(250.0, 180.0, 140.0, 165.0)
    apply_auto_scale(st, target, K, pose)
    box = project_mesh_bbox(K, pose, st.scale, anchor, st.model)
    assert box.w == pytest.approx(target.w, abs=1e-6)
    assert box.h == pytest.approx(target.h, abs=1e-6)
    scale_after_first = st.scale
    apply_auto_scale(st, target, K, pose)
    assert st.scale.s_w == pytest.approx(scale_after_first.s_w, abs=1e-9)
    assert st.scale.s_h == pytest.approx(scale_after_first.s_h, abs=1e-9)


def test_apply_auto_scale_fixed_point_when_already_matching():
    st = _state(auto_scale_enabled=True)
    pose = translation(0.0, 0.0, 0.5)
    anchor = project_point(K, (0.0, 0.0, 0.5))
    box_m = project_mesh_bbox(K, pose, st.scale, anchor, st.model)
    apply_auto_scale(st, box_m, K, pose)
    assert st.scale.s_w == pytest.approx(1.0, abs=1e-12)
    assert st.scale.s_h == pytest.approx(1.0, abs=1e-12)


def test_one_shot_applies_once_then_clears():
    st = _state(auto_scale_once=True)
    pose = translation(0.0, 0.0, 0.5)
    target = Rect(200.0, 150.0, 180.0, 200.0)
    apply_auto_scale(st, target, K, pose)
    assert st.auto_scale_once is False
    scale_after = st.scale
    # second call with a different target must be a no-op now
    apply_auto_scale(st, Rect(0, 0, 50, 50), K, pose)
    assert st.scale == scale_after


# --- boundary resolution ------------------------------------------------------------

def test_resolve_box_i_passthrough():
    box = Rect(10, 20, 30, 40)
    assert resolve_box_i(_frame(translation(0, 0, 0.5), box=box), K) == box


def test_resolve_box_i_scales_mask_to_image():
    # full-foreground 32x24 mask maps to the full 640x480 image
    runs = (0, 32 * 24)
    frame = _frame(translation(0, 0, 0.5), mask_rle=MaskRle(32, 24, runs))
    box = resolve_box_i(frame, K)
    assert box == Rect(0.0, 0.0, 640.0, 480.0)


def test_resolve_box_i_empty_mask_is_none():
    frame = _frame(translation(0, 0, 0.5), mask_rle=MaskRle(32, 24, (32 * 24,)))
    assert resolve_box_i(frame, K) is None


def test_resolve_box_i_absent_is_none():
    assert resolve_box_i(_frame(translation(0, 0, 0.5)), K) is None


# --- full step -------------------------------------------------------------------

def test_step_projects_and_reports():
    st = _state(opacity=0.7, visible=False)
    res = step(st, _frame(translation(0.0, 0.0, 0.5)), K)
    assert isinstance(res, FrameResult)
    assert res.opacity == 0.7
    assert res.visible is False  # hidden overlays still produce a box
    assert res.box_m.w > 0 and res.box_m.h > 0
    assert res.anchor == (pytest.approx(320.0), pytest.approx(240.0))
    assert res.box_i is None


def test_step_auto_scale_matches_boundary():
    st = _state(auto_scale_enabled=True)
    target = Rect(260.0, 170.0, 120.0, 150.0)
    res = step(st, _frame(translation(0.0, 0.0, 0.5), box=target), K)
    assert res.box_m.w == pytest.approx(target.w, abs=1e-9)
    assert res.box_m.h == pytest.approx(target.h, abs=1e-9)
    assert res.box_i == target


def test_step_manual_scale_changes_box():
    plain = step(_state(), _frame(translation(0.0, 0.0, 0.5)), K)
    doubled = step(_state(manual_scale=(2.0, 1.0, 1.0)),
                   _frame(translation(0.0, 0.0, 0.5)), K)
    assert doubled.box_m.w == pytest.approx(2.0 * plain.box_m.w, rel=1e-12)
    assert doubled.box_m.h == pytest.approx(plain.box_m.h, rel=1e-12)


def test_step_cube_model_hand_anchor():
    st = RegistrationState(model=unit_cube())
    k90 = intrinsics_from_fov(90.0, 480, 480)
    res = step(st, _frame(translation(0.0, 0.0, 4.0)), k90)
    assert res.box_m.x == pytest.approx(205.7142857142857, abs=1e-9)
    assert res.box_m.w == pytest.approx(68.57142857142857, abs=1e-9)


# --- manual parameter updates ---------------------------------------------------------

def test_set_manual_applies_fields():
    st = _state()
    set_manual(st, opacity=0.25, visible=False, manual_scale=(1.1, 1.2, 1.3),
               smoothing_alpha=0.5, auto_scale_enabled=True)
    assert st.opacity == 0.25
    assert st.visible is False
    assert st.manual_scale == (1.1, 1.2, 1.3)
    assert st.smoothing_alpha == 0.5
    assert st.auto_scale_enabled is True


def test_set_manual_rejects_out_of_range():
    st = _state()
    with pytest.raises(RangeError):
        set_manual(st, opacity=1.5)
    with pytest.raises(RangeError):
        set_manual(st, opacity=-0.1)
    with pytest.raises(RangeError):
        set_manual(st, smoothing_alpha=0.0)
    with pytest.raises(RangeError):
        set_manual(st, manual_scale=(1.0, -2.0, 1.0))
    with pytest.raises(RangeError):
        set_manual(st, scale=(10.0, 1.0))  # beyond SCALE_MAX
    with pytest.raises(RangeError):
        set_manual(st, visible="yes")
    with pytest.raises(RangeError):
        set_manual(st, frobnicate=1)


def test_set_manual_is_atomic():
    st = _state()
    with pytest.raises(RangeError):
        set_manual(st, opacity=0.5, smoothing_alpha=-1.0)
    assert st.opacity == 1.0  # valid field must not have been applied


def test_set_manual_offset_must_be_rigid():
    st = _state()
    bad = identity_pose()
    bad[1, 1] = 3.0
    with pytest.raises(RangeError):
        set_manual(st, offset=bad)
    good = translation(0.0, 0.01, 0.0)
    set_manual(st, offset=good)
    assert (st.offset == good).all()
