"""Projection and transform algebra tests.

Oracle notes.  The pinhole reference path used throughout is the full
homogeneous product written out by hand (build K as a 3x3, multiply T into
the point as a 4-vector, divide by the resulting depth), implemented here
in `_oracle_project` independently of the library's scalar pipeline.

Frozen constants, derived by evaluating tan at high precision:

    fy(50 deg, h=480) = 240 / tan(25 deg) = 514.6816609222941
    u for K(50,480,480), point (1,0,2):
        514.6816609222941 * 0.5 + 240 = 497.34083046114705

(tan(25 deg) = 0.46630765815499859, checked against a 30-digit expansion;
naive rounding of intermediate values gives 514.678 which is wrong in the
third decimal.)
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from headfit.errors import BehindCamera, DomainError, Singular
from headfit.geometry import (
    CameraIntrinsics,
    Rect,
    ScaleFactors,
    blend_pose,
    clamp_scale,
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
    scaling,
    translation,
)

K90 = intrinsics_from_fov(90.0, 480, 480)
K50 = intrinsics_from_fov(50.0, 480, 480)


def _oracle_project(k: CameraIntrinsics, t: np.ndarray, p) -> tuple[float, float]:
    """Independent Eq. 1 route: z_c * p_c = K (T P_w), spelled as matrix
    algebra instead of the library's scalar pipeline."""
    km = np.array([[k.fx, 0.0, k.cx], [0.0, k.fy, k.cy], [0.0, 0.0, 1.0]])
    pc = t @ np.array([p[0], p[1], p[2], 1.0])
    hom = km @ pc[:3]
    return (hom[0] / hom[2], hom[1] / hom[2])


# --- intrinsics -------------------------------------------------------------

def test_intrinsics_90():
    # mathematically fy = 240/tan(45 deg) = 240; float tan(pi/4) sits one
    # ulp below 1, so allow that much slack
    assert K90.fy == pytest.approx(240.0, abs=1e-10)
    assert K90.fx == K90.fy
    assert (K90.cx, K90.cy) == (240.0, 240.0)


def test_intrinsics_50_matches_high_precision_tan():
    assert K50.fy == pytest.approx(514.6816609222941, abs=1e-9)
    assert K50.fx == K50.fy
    # same number via an independent identity: tan x = sin x / cos x
    rad = math.radians(25.0)
    assert K50.fy == pytest.approx(240.0 * math.cos(rad) / math.sin(rad), abs=1e-9)


@pytest.mark.parametrize("fov", [0.0, 180.0, -10.0, 360.0])
def test_intrinsics_fov_domain(fov):
    with pytest.raises(DomainError):
        intrinsics_from_fov(fov, 480, 480)


def test_intrinsics_validation():
    with pytest.raises(DomainError):
        CameraIntrinsics(fx=-1.0, fy=1.0, cx=0.0, cy=0.0, image_w=10, image_h=10)
    with pytest.raises(DomainError):
        CameraIntrinsics(fx=1.0, fy=1.0, cx=99.0, cy=0.0, image_w=10, image_h=10)


# --- normalize / project ----------------------------------------------------

def test_normalize_examples():
    assert normalize((0.0, 0.0, 2.0)) == (0.0, 0.0)
    assert normalize((1.0, -2.0, 2.0)) == (0.5, -1.0)


def test_normalize_behind_camera():
    with pytest.raises(BehindCamera):
        normalize((1.0, 1.0, 0.0))
    with pytest.raises(BehindCamera):
        normalize((0.0, 0.0, 1e-7))


def test_project_point_principal_point():
    assert project_point(K90, (0.0, 0.0, 2.0)) == (240.0, 240.0)


def test_project_point_frozen_oracle_value():
    u, v = project_point(K50, (1.0, 0.0, 2.0))
    assert u == pytest.approx(497.34083046114705, abs=1e-9)
    assert v == 240.0


def test_project_point_behind():
    with pytest.raises(BehindCamera):
        project_point(K90, (0.0, 0.0, -1.0))


def test_project_full_identity_equals_simple_path():
    rng = np.random.default_rng(4)
    eye = identity_pose()
    for _ in range(1000):
        p = (rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(0.25, 10))
        a = project_point(K50, p)
        b = project_point_full(K50, eye, p)
        assert abs(a[0] - b[0]) <= 1e-12
        assert abs(a[1] - b[1]) <= 1e-12


def test_project_full_hand_multiply():
    # T = translate(0,0,1) moves (0,0,1) to depth 2; hand multiply gives
    # z_c = 2 and the principal point.
    t = translation(0.0, 0.0, 1.0)
    assert project_point_full(K90, t, (0.0, 0.0, 1.0)) == (240.0, 240.0)
    assert _oracle_project(K90, t, (0.0, 0.0, 1.0)) == (240.0, 240.0)


def test_project_full_agrees_with_matrix_oracle():
    rng = np.random.default_rng(11)
    for _ in range(250):
        t = compose(translation(*rng.uniform(-0.5, 0.5, 3)), rot_y(rng.uniform(-40, 40)))
        p = (rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(1.0, 8.0))
        got = project_point_full(K50, t, p)
        want = _oracle_project(K50, t, p)
        assert got[0] == pytest.approx(want[0], abs=1e-9)
        assert got[1] == pytest.approx(want[1], abs=1e-9)


def test_project_full_behind():
    with pytest.raises(BehindCamera):
        project_point_full(K90, translation(0.0, 0.0, -2.0), (0.0, 0.0, 1.0))


@given(st.floats(0.001, 1000.0),
       st.floats(-10, 10), st.floats(-10, 10), st.floats(0.1, 100.0))
@settings(max_examples=200)
def test_projection_scale_invariant(lam, x, y, z):
    # Eq. 3 consequence: scaling the point uniformly cancels in x/z.
    a = project_point(K50, (x, y, z))
    b = project_point(K50, (x * lam, y * lam, z * lam))
    assert a[0] == pytest.approx(b[0], abs=1e-6)
    assert a[1] == pytest.approx(b[1], abs=1e-6)


# --- scaled projection ------------------------------------------------------

def test_project_scaled_identity_scale_is_bitwise():
    rng = np.random.default_rng(5)
    one = ScaleFactors(1.0, 1.0)
    for _ in range(200):
        pn = (rng.uniform(-1, 1), rng.uniform(-1, 1))
        u0 = K50.fx * pn[0] + K50.cx
        v0 = K50.fy * pn[1] + K50.cy
        assert project_scaled(K50, one, pn) == (u0, v0)


def test_project_scaled_hand_example():
    # expanding K S P_n by hand: u = fx*s_w*nx + cx = 240*2*0.5 + 240 = 480
    u, v = project_scaled(K90, ScaleFactors(2.0, 1.0), (0.5, 0.0))
    assert u == pytest.approx(480.0, abs=1e-10)
    assert v == 240.0


def test_project_scaled_fixed_point():
    assert project_scaled(K90, ScaleFactors(2.0, 3.0), (0.0, 0.0)) == (240.0, 240.0)


def test_project_scaled_about_symmetry_example():
    # unscaled projection (150, 100); doubling offsets from (100, 100)
    pn = ((150.0 - K90.cx) / K90.fx, (100.0 - K90.cy) / K90.fy)
    u, v = project_scaled_about(K90, ScaleFactors(2.0, 2.0), (100.0, 100.0), pn)
    assert u == pytest.approx(200.0, abs=1e-9)
    assert v == pytest.approx(100.0, abs=1e-9)


def test_project_scaled_about_reduces_to_literal_form():
    rng = np.random.default_rng(6)
    for _ in range(1000):
        s = ScaleFactors(rng.uniform(0.25, 4.0), rng.uniform(0.25, 4.0))
        pn = (rng.uniform(-1, 1), rng.uniform(-1, 1))
        assert project_scaled_about(K50, s, (K50.cx, K50.cy), pn) == project_scaled(K50, s, pn)


@given(st.floats(0.25, 2.0), st.floats(0.25, 2.0),
       st.floats(-1, 1), st.floats(-1, 1))
@settings(max_examples=200)
def test_project_scaled_offset_linearity(s_w, s_h, nx, ny):
    c = (K50.cx, K50.cy)
    u1, v1 = project_scaled(K50, ScaleFactors(s_w, s_h), (nx, ny))
    u2, v2 = project_scaled(K50, ScaleFactors(2 * s_w, 2 * s_h), (nx, ny))
    assert (u2 - c[0]) == pytest.approx(2 * (u1 - c[0]), abs=1e-9)
    assert (v2 - c[1]) == pytest.approx(2 * (v1 - c[1]), abs=1e-9)


# --- transform algebra ------------------------------------------------------

def test_compose_identity():
    b = compose(translation(1, 2, 3), rot_z(30))
    assert np.array_equal(compose(identity_pose(), b), b)


def test_invert_translation():
    assert np.allclose(invert(translation(1, 2, 3)), translation(-1, -2, -3),
                       rtol=0, atol=1e-15)


def test_invert_rotation_roundtrip():
    m = rot_x(30.0)
    assert np.allclose(compose(m, invert(m)), np.eye(4), rtol=0, atol=1e-12)


def test_invert_singular():
    bad = np.zeros((4, 4))
    bad[3, 3] = 1.0
    with pytest.raises(Singular):
        invert(bad)


def test_compose_associative_on_random_rigid():
    rng = np.random.default_rng(9)
    for _ in range(100):
        a = compose(translation(*rng.uniform(-1, 1, 3)), rot_x(rng.uniform(-180, 180)))
        b = compose(translation(*rng.uniform(-1, 1, 3)), rot_y(rng.uniform(-180, 180)))
        c = compose(translation(*rng.uniform(-1, 1, 3)), rot_z(rng.uniform(-180, 180)))
        assert np.allclose(compose(compose(a, b), c), compose(a, compose(b, c)),
                           rtol=0, atol=1e-9)


def test_is_rigid():
    assert is_rigid(identity_pose())
    assert is_rigid(compose(translation(1, 2, 3), rot_y(77.0)))
    assert not is_rigid(scaling(2.0, 1.0, 1.0))
    reflect = np.diag([-1.0, 1.0, 1.0, 1.0])  # det < 0
    assert not is_rigid(reflect)
    bad_row = identity_pose()
    bad_row[3, 0] = 0.5
    assert not is_rigid(bad_row)
    assert not is_rigid(np.eye(3))


# --- serialization ----------------------------------------------------------

def test_pose_column_major_layout():
    m = pose_from_column_major(list(range(16)))
    # column-major: the first four values fill the first column
    assert m[0, 0] == 0 and m[1, 0] == 1 and m[2, 0] == 2 and m[3, 0] == 3
    assert m[0, 1] == 4
    assert pose_to_column_major(m) == [float(i) for i in range(16)]


def test_pose_column_major_roundtrip_random():
    rng = np.random.default_rng(3)
    vals = rng.normal(size=16).tolist()
    assert pose_to_column_major(pose_from_column_major(vals)) == vals


def test_pose_wrong_length():
    with pytest.raises(DomainError):
        pose_from_column_major([0.0] * 15)


# --- smoothing --------------------------------------------------------------

def test_blend_alpha_one_returns_target():
    target = compose(translation(1, 2, 3), rot_z(10))
    out = blend_pose(identity_pose(), target, 1.0)
    assert np.array_equal(out, target)
    assert out is not target  # caller owns a copy


def test_blend_translation_lerp():
    out = blend_pose(identity_pose(), translation(2, 0, 0), 0.5)
    assert np.allclose(out[:3, 3], (1, 0, 0), rtol=0, atol=1e-15)
    assert np.allclose(out[:3, :3], np.eye(3), rtol=0, atol=1e-15)


def test_blend_rotation_shortest_arc():
    out = blend_pose(identity_pose(), rot_x(60.0), 0.5)
    assert np.allclose(out, rot_x(30.0), rtol=0, atol=1e-12)


# --- small value types ------------------------------------------------------

def test_rect_validation_and_area():
    r = Rect(1.0, 2.0, 3.0, 4.0)
    assert r.area == 12.0
    assert not r.is_degenerate
    assert Rect(0, 0, 0, 5).is_degenerate
    with pytest.raises(DomainError):
        Rect(0, 0, -1.0, 5.0)
    assert r.scaled(2.0, 0.5) == Rect(2.0, 1.0, 6.0, 2.0)


def test_clamp_scale():
    assert clamp_scale(0.1, 9.0) == ScaleFactors(0.25, 4.0)
    assert clamp_scale(1.3, 0.9) == ScaleFactors(1.3, 0.9)
