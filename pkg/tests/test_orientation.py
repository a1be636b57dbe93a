import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rehabmetrics.orientation import (
    EulerAngles,
    OrientationFilter,
    euler_to_quat,
    quat_conjugate,
    quat_multiply,
    quat_normalize,
    quat_to_euler,
    quat_to_matrix,
    wrap_180,
)


def test_wrap_180_range():
    assert wrap_180(180.0) == -180.0
    assert wrap_180(-180.0) == -180.0
    assert wrap_180(540.0) == -180.0
    assert wrap_180(179.9) == pytest.approx(179.9)
    assert wrap_180(0.0) == 0.0


def test_identity_quaternion_is_zero_euler():
    e = quat_to_euler(np.array([1.0, 0.0, 0.0, 0.0]))
    assert e == EulerAngles(0.0, 0.0, 0.0, gimbal_lock=False)


@given(
    yaw=st.floats(min_value=-179.0, max_value=179.0),
    pitch=st.floats(min_value=-89.0, max_value=89.0),
    roll=st.floats(min_value=-179.0, max_value=179.0),
)
def test_euler_quat_roundtrip(yaw, pitch, roll):
    e = quat_to_euler(euler_to_quat(yaw, pitch, roll))
    assert e.yaw == pytest.approx(yaw, abs=1e-9)
    assert e.pitch == pytest.approx(pitch, abs=1e-9)
    assert e.roll == pytest.approx(roll, abs=1e-9)
    assert not e.gimbal_lock


def test_gimbal_lock_flagged_near_vertical_pitch():
    assert quat_to_euler(euler_to_quat(10.0, 90.0, 0.0)).gimbal_lock
    assert quat_to_euler(euler_to_quat(10.0, -89.95, 0.0)).gimbal_lock
    assert not quat_to_euler(euler_to_quat(10.0, 89.0, 0.0)).gimbal_lock


def test_quat_multiply_matches_matrix_product():
    rng = np.random.default_rng(3)
    for _ in range(50):
        a = quat_normalize(rng.normal(size=4))
        b = quat_normalize(rng.normal(size=4))
        left = quat_to_matrix(quat_multiply(a, b))
        right = quat_to_matrix(a) @ quat_to_matrix(b)
        assert np.allclose(left, right, atol=1e-12)


def test_conjugate_inverts_rotation():
    rng = np.random.default_rng(4)
    q = quat_normalize(rng.normal(size=4))
    ident = quat_multiply(q, quat_conjugate(q))
    assert np.allclose(ident, [1, 0, 0, 0], atol=1e-12) or np.allclose(
        ident, [-1, 0, 0, 0], atol=1e-12
    )


def test_zero_norm_quaternion_rejected():
    with pytest.raises(ValueError):
        quat_normalize(np.zeros(4))


def test_filter_holds_identity_under_gravity():
    f = OrientationFilter()
    for _ in range(500):
        f.update_imu(np.zeros(3), np.array([0.0, 0.0, 1.0]))
    e = f.euler()
    assert abs(e.pitch) < 0.01 and abs(e.roll) < 0.01


def test_filter_converges_from_large_tilt():
    f = OrientationFilter(q0=euler_to_quat(0.0, 60.0, -45.0))
    for _ in range(500):  # 10 s at 50 Hz
        f.update_imu(np.zeros(3), np.array([0.0, 0.0, 1.0]))
    e = f.euler()
    assert abs(e.pitch) < 1.0 and abs(e.roll) < 1.0


def test_constant_small_gain_cannot_recover_in_time():
    """The initialization ramp is load-bearing: without it the fixed
    steady-state gain leaves a far-from-truth start unconverged."""
    f = OrientationFilter(beta_init=0.0, q0=euler_to_quat(20.0, 85.0, 170.0))
    for _ in range(500):
        f.update_imu(np.zeros(3), np.array([0.0, 0.0, 1.0]))
    e = f.euler()
    assert abs(e.pitch) + abs(e.roll) > 5.0


def test_zero_accel_propagates_gyro_only():
    f = OrientationFilter(q0=euler_to_quat(30.0, 20.0, 10.0))
    q_before = f.q.copy()
    f.update_imu(np.zeros(3), np.zeros(3))
    assert np.allclose(f.q, q_before, atol=1e-12)
    # constant gyro rotation integrates with no accel correction
    f2 = OrientationFilter()
    for _ in range(50):  # 1 s of 90 deg/s yaw, lock-step with no gravity
        f2.update_imu(np.array([0.0, 0.0, np.pi / 2]), np.zeros(3))
    assert f2.euler().yaw == pytest.approx(90.0, abs=1.0)


def test_marg_zero_mag_falls_back_to_imu():
    f1 = OrientationFilter(q0=euler_to_quat(5.0, 5.0, 5.0))
    f2 = OrientationFilter(q0=euler_to_quat(5.0, 5.0, 5.0))
    g = np.array([0.01, -0.02, 0.03])
    a = np.array([0.0, 0.05, 1.0])
    f1.update_imu(g, a)
    f2.update_marg(g, a, np.zeros(3))
    assert np.allclose(f1.q, f2.q, atol=1e-15)


def test_marg_converges_heading():
    """With a magnetometer the filter recovers yaw too, not just tilt."""
    f = OrientationFilter(q0=euler_to_quat(120.0, 30.0, -40.0))
    mag_world = np.array([0.4, 0.0, -0.6])
    for _ in range(1000):
        f.update_marg(np.zeros(3), np.array([0.0, 0.0, 1.0]), mag_world)
    e = f.euler()
    assert abs(e.pitch) < 1.0 and abs(e.roll) < 1.0
    assert abs(wrap_180(e.yaw)) < 5.0


def test_beta_ramp_decays_to_steady_state():
    f = OrientationFilter(beta=0.1, beta_init=2.5, init_time=3.0)
    assert f._beta_eff() == 2.5
    for _ in range(100):  # 2 s
        f.update_imu(np.zeros(3), np.array([0.0, 0.0, 1.0]))
    assert 0.1 < f._beta_eff() < 2.5
    for _ in range(100):  # past init_time
        f.update_imu(np.zeros(3), np.array([0.0, 0.0, 1.0]))
    assert f._beta_eff() == 0.1
