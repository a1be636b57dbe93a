"""Orientation estimation: gradient-descent sensor fusion and Euler conversions.

Quaternions are (w, x, y, z) unit arrays. Euler angles follow the aerospace
Z-Y-X intrinsic convention in degrees: yaw and roll in [-180, 180), pitch in
[-90, 90]. The fusion filter runs at a fixed sample period and corrects the
gyro integration toward the accelerometer (and optionally magnetometer)
direction with a tunable gradient step.

The gradient step is proportional to the orientation error only near the
solution, so a fixed small gain converges far too slowly from an arbitrary
initial state. The filter therefore applies a decaying initialization gain
for the first few seconds after reset (standard practice for this family of
filters); steady-state behavior is unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import asin, atan2, cos, degrees, radians, sin, sqrt

import numpy as np

GIMBAL_LOCK_PITCH_DEG = 89.9


@dataclass(frozen=True)
class EulerAngles:
    yaw: float
    pitch: float
    roll: float
    gimbal_lock: bool = False


def quat_normalize(q: np.ndarray) -> np.ndarray:
    n = float(np.linalg.norm(q))
    if n == 0.0:
        raise ValueError("zero-norm quaternion")
    return q / n


def quat_multiply(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ]
    )


def quat_conjugate(q: np.ndarray) -> np.ndarray:
    return np.array([q[0], -q[1], -q[2], -q[3]])


def quat_to_matrix(q: np.ndarray) -> np.ndarray:
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def wrap_180(deg: float) -> float:
    """Wrap to [-180, 180)."""
    return (deg + 180.0) % 360.0 - 180.0


def quat_to_euler(q: np.ndarray) -> EulerAngles:
    """Aerospace Z-Y-X Euler angles in degrees, with a gimbal-lock flag.

    The asin argument is clamped so numerically off-unit quaternions cannot
    raise; |pitch| beyond 89.9 degrees sets gimbal_lock because yaw and roll
    lose independent meaning there.
    """
    w, x, y, z = quat_normalize(np.asarray(q, dtype=float))
    sp = 2.0 * (w * y - z * x)
    sp = max(-1.0, min(1.0, sp))
    pitch = degrees(asin(sp))
    yaw = degrees(atan2(2.0 * (w * z + x * y), 1.0 - 2.0 * (y * y + z * z)))
    roll = degrees(atan2(2.0 * (w * x + y * z), 1.0 - 2.0 * (x * x + y * y)))
    return EulerAngles(
        yaw=wrap_180(yaw),
        pitch=pitch,
        roll=wrap_180(roll),
        gimbal_lock=abs(pitch) > GIMBAL_LOCK_PITCH_DEG,
    )


def euler_to_quat(yaw_deg: float, pitch_deg: float, roll_deg: float) -> np.ndarray:
    """Inverse of quat_to_euler (up to quaternion sign)."""
    cy = cos(radians(yaw_deg) / 2)
    sy = sin(radians(yaw_deg) / 2)
    cp = cos(radians(pitch_deg) / 2)
    sp = sin(radians(pitch_deg) / 2)
    cr = cos(radians(roll_deg) / 2)
    sr = sin(radians(roll_deg) / 2)
    return np.array(
        [
            cy * cp * cr + sy * sp * sr,
            cy * cp * sr - sy * sp * cr,
            cy * sp * cr + sy * cp * sr,
            sy * cp * cr - cy * sp * sr,
        ]
    )


class OrientationFilter:
    """Gradient-descent IMU/MARG fusion at a fixed sample period.

    Args:
        sample_period: seconds between updates (default 20 ms).
        beta: steady-state gradient gain.
        beta_init: starting value of the initialization gain ramp. The
            effective gain is max(beta, beta_init * (1 - t / init_time))
            until init_time has elapsed since construction or reset().
            Set to 0 to disable the ramp.
        init_time: ramp duration in seconds.
        q0: initial orientation quaternion (defaults to identity).
    """

    def __init__(
        self,
        sample_period: float = 1.0 / 50.0,
        beta: float = 0.1,
        beta_init: float = 8.0,
        init_time: float = 4.0,
        q0: np.ndarray | None = None,
    ):
        self.sample_period = sample_period
        self.beta = beta
        self.beta_init = beta_init
        self.init_time = init_time
        self.q = (
            quat_normalize(np.asarray(q0, dtype=float))
            if q0 is not None
            else np.array([1.0, 0.0, 0.0, 0.0])
        )
        self._t = 0.0

    def reset(self, q0: np.ndarray | None = None) -> None:
        self.q = (
            quat_normalize(np.asarray(q0, dtype=float))
            if q0 is not None
            else np.array([1.0, 0.0, 0.0, 0.0])
        )
        self._t = 0.0

    def _beta_eff(self) -> float:
        if self._t < self.init_time and self.beta_init > 0.0:
            return max(self.beta, self.beta_init * (1.0 - self._t / self.init_time))
        return self.beta

    def update_imu(self, gyro: np.ndarray, accel: np.ndarray) -> np.ndarray:
        """6-DOF update: gyro in rad/s, accelerometer in any consistent unit.

        A zero-norm accelerometer reading (free fall, dropout) skips the
        corrective step and propagates by the gyro alone.
        """
        q0, q1, q2, q3 = self.q
        gx, gy, gz = np.asarray(gyro, dtype=float)
        accel = np.asarray(accel, dtype=float)

        q_dot = 0.5 * np.array(
            [
                -q1 * gx - q2 * gy - q3 * gz,
                q0 * gx + q2 * gz - q3 * gy,
                q0 * gy - q1 * gz + q3 * gx,
                q0 * gz + q1 * gy - q2 * gx,
            ]
        )

        a_norm = float(np.linalg.norm(accel))
        if a_norm > 0.0:
            ax, ay, az = accel / a_norm
            # Objective function: rotated gravity minus measurement.
            f = np.array(
                [
                    2.0 * (q1 * q3 - q0 * q2) - ax,
                    2.0 * (q0 * q1 + q2 * q3) - ay,
                    2.0 * (0.5 - q1 * q1 - q2 * q2) - az,
                ]
            )
            j = np.array(
                [
                    [-2.0 * q2, 2.0 * q3, -2.0 * q0, 2.0 * q1],
                    [2.0 * q1, 2.0 * q0, 2.0 * q3, 2.0 * q2],
                    [0.0, -4.0 * q1, -4.0 * q2, 0.0],
                ]
            )
            step = j.T @ f
            n = float(np.linalg.norm(step))
            if n > 0.0:
                q_dot -= self._beta_eff() * step / n

        self.q = quat_normalize(self.q + q_dot * self.sample_period)
        self._t += self.sample_period
        return self.q

    def update_marg(
        self, gyro: np.ndarray, accel: np.ndarray, mag: np.ndarray
    ) -> np.ndarray:
        """9-DOF update; falls back to the 6-DOF step if the magnetometer
        reading has zero norm."""
        mag = np.asarray(mag, dtype=float)
        m_norm = float(np.linalg.norm(mag))
        if m_norm == 0.0:
            return self.update_imu(gyro, accel)
        accel = np.asarray(accel, dtype=float)
        a_norm = float(np.linalg.norm(accel))
        if a_norm == 0.0:
            return self.update_imu(gyro, accel)

        q0, q1, q2, q3 = self.q
        gx, gy, gz = np.asarray(gyro, dtype=float)
        ax, ay, az = accel / a_norm
        mx, my, mz = mag / m_norm

        q_dot = 0.5 * np.array(
            [
                -q1 * gx - q2 * gy - q3 * gz,
                q0 * gx + q2 * gz - q3 * gy,
                q0 * gy - q1 * gz + q3 * gx,
                q0 * gz + q1 * gy - q2 * gx,
            ]
        )

        # Reference flux in the earth frame, constrained to the xz plane.
        h = quat_multiply(
            quat_multiply(self.q, np.array([0.0, mx, my, mz])),
            quat_conjugate(self.q),
        )
        bx = sqrt(h[1] * h[1] + h[2] * h[2])
        bz = h[3]

        f = np.array(
            [
                2.0 * (q1 * q3 - q0 * q2) - ax,
                2.0 * (q0 * q1 + q2 * q3) - ay,
                2.0 * (0.5 - q1 * q1 - q2 * q2) - az,
                2.0 * bx * (0.5 - q2 * q2 - q3 * q3)
                + 2.0 * bz * (q1 * q3 - q0 * q2)
                - mx,
                2.0 * bx * (q1 * q2 - q0 * q3)
                + 2.0 * bz * (q0 * q1 + q2 * q3)
                - my,
                2.0 * bx * (q0 * q2 + q1 * q3)
                + 2.0 * bz * (0.5 - q1 * q1 - q2 * q2)
                - mz,
            ]
        )
        j = np.array(
            [
                [-2.0 * q2, 2.0 * q3, -2.0 * q0, 2.0 * q1],
                [2.0 * q1, 2.0 * q0, 2.0 * q3, 2.0 * q2],
                [0.0, -4.0 * q1, -4.0 * q2, 0.0],
                [
                    -2.0 * bz * q2,
                    2.0 * bz * q3,
                    -4.0 * bx * q2 - 2.0 * bz * q0,
                    -4.0 * bx * q3 + 2.0 * bz * q1,
                ],
                [
                    -2.0 * bx * q3 + 2.0 * bz * q1,
                    2.0 * bx * q2 + 2.0 * bz * q0,
                    2.0 * bx * q1 + 2.0 * bz * q3,
                    -2.0 * bx * q0 + 2.0 * bz * q2,
                ],
                [
                    2.0 * bx * q2,
                    2.0 * bx * q3 - 4.0 * bz * q1,
                    2.0 * bx * q0 - 4.0 * bz * q2,
                    2.0 * bx * q1,
                ],
            ]
        )
        step = j.T @ f
        n = float(np.linalg.norm(step))
        if n > 0.0:
            q_dot -= self._beta_eff() * step / n

        self.q = quat_normalize(self.q + q_dot * self.sample_period)
        self._t += self.sample_period
        return self.q

    def euler(self) -> EulerAngles:
        return quat_to_euler(self.q)
