"""Forward kinematics of the sensed arm as a Denavit-Hartenberg chain.

The avatar is three rigid segments: upper arm driven by sensor 1, forearm
driven by sensor 2, hand extending the forearm frame. Each sensed rotation is
decomposed into Z-Y-Z joint angles that feed a standard DH table, so the
chain stays pure DH while reproducing the sensor orientations exactly: with
all joint angles zero the arm hangs straight down (-z) and the fingertip sits
at minus the summed segment lengths.

Joint layout (7 rows, all a=0):
    rows 1-3: shoulder Z-Y-Z, row 3 carries the upper-arm length
    rows 4-6: elbow/forearm Z-Y-Z of the relative rotation, row 6 carries
              the forearm length
    row 7:    fixed hand extension
"""

from __future__ import annotations

from dataclasses import dataclass
from math import atan2, cos, pi, sin, sqrt

import numpy as np

from .orientation import quat_conjugate, quat_multiply, quat_to_matrix


@dataclass(frozen=True)
class SegmentLengths:
    """Meters. Defaults approximate a 50th-percentile adult."""

    upper_arm: float = 0.30
    forearm: float = 0.25
    hand: float = 0.18

    def __post_init__(self):
        for name in ("upper_arm", "forearm", "hand"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} length must be positive")

    @property
    def reach(self) -> float:
        return self.upper_arm + self.forearm + self.hand


@dataclass(frozen=True)
class DHRow:
    a: float
    alpha: float
    d: float
    theta: float


def dh_matrix(row: DHRow) -> np.ndarray:
    """Homogeneous transform of one DH row: Rz(theta) Tz(d) Tx(a) Rx(alpha)."""
    ct, st = cos(row.theta), sin(row.theta)
    ca, sa = cos(row.alpha), sin(row.alpha)
    return np.array(
        [
            [ct, -st * ca, st * sa, row.a * ct],
            [st, ct * ca, -ct * sa, row.a * st],
            [0.0, sa, ca, row.d],
            [0.0, 0.0, 0.0, 1.0],
        ]
    )


def _zyz(r: np.ndarray) -> tuple[float, float, float]:
    """Z-Y-Z Euler angles (radians) of a rotation matrix.

    Degenerate poses (middle angle 0 or pi, e.g. the rest pose with the
    segment along -z) collapse the first angle to 0 and put the whole spin
    on the last.
    """
    sy = sqrt(r[0, 2] ** 2 + r[1, 2] ** 2)
    b = atan2(sy, r[2, 2])
    if sy > 1e-12:
        a = atan2(r[1, 2], r[0, 2])
        c = atan2(r[2, 1], -r[2, 0])
        return a, b, c
    if r[2, 2] > 0.0:
        return 0.0, 0.0, atan2(r[1, 0], r[0, 0])
    return 0.0, pi, atan2(r[1, 0], -r[0, 0])


@dataclass(frozen=True)
class ArmPose:
    """Joint positions in the world frame, meters. Shoulder is the origin."""

    shoulder: np.ndarray
    elbow: np.ndarray
    wrist: np.ndarray
    hand_tip: np.ndarray

    def as_array(self) -> np.ndarray:
        return np.stack([self.shoulder, self.elbow, self.wrist, self.hand_tip])


class ArmModel:
    """Two-sensor arm: orientation quaternions in, joint positions out."""

    def __init__(self, lengths: SegmentLengths | None = None):
        self.lengths = lengths or SegmentLengths()

    def dh_rows(self, q_upper: np.ndarray, q_fore: np.ndarray) -> list[DHRow]:
        """DH table for the given sensor orientations.

        The forearm block receives the rotation of sensor 2 relative to
        sensor 1, so chaining reproduces both absolute orientations.
        """
        r_upper = quat_to_matrix(np.asarray(q_upper, dtype=float))
        q_rel = quat_multiply(
            quat_conjugate(np.asarray(q_upper, dtype=float)),
            np.asarray(q_fore, dtype=float),
        )
        r_rel = quat_to_matrix(q_rel)
        a1, b1, c1 = _zyz(r_upper)
        a2, b2, c2 = _zyz(r_rel)
        L = self.lengths
        return [
            DHRow(a=0.0, alpha=-pi / 2, d=0.0, theta=a1),
            DHRow(a=0.0, alpha=pi / 2, d=0.0, theta=b1),
            DHRow(a=0.0, alpha=0.0, d=-L.upper_arm, theta=c1),
            DHRow(a=0.0, alpha=-pi / 2, d=0.0, theta=a2),
            DHRow(a=0.0, alpha=pi / 2, d=0.0, theta=b2),
            DHRow(a=0.0, alpha=0.0, d=-L.forearm, theta=c2),
            DHRow(a=0.0, alpha=0.0, d=-L.hand, theta=0.0),
        ]

    def pose(self, q_upper: np.ndarray, q_fore: np.ndarray | None = None) -> ArmPose:
        """Forward kinematics. With one sensor the forearm extends the upper arm.

        Joint positions are read off the chain after rows 3 (elbow), 6
        (wrist) and 7 (hand tip).
        """
        if q_fore is None:
            q_fore = q_upper
        rows = self.dh_rows(q_upper, q_fore)
        t = np.eye(4)
        joints = {}
        for i, row in enumerate(rows, start=1):
            t = t @ dh_matrix(row)
            if i == 3:
                joints["elbow"] = t[:3, 3].copy()
            elif i == 6:
                joints["wrist"] = t[:3, 3].copy()
            elif i == 7:
                joints["hand_tip"] = t[:3, 3].copy()
        return ArmPose(
            shoulder=np.zeros(3),
            elbow=joints["elbow"],
            wrist=joints["wrist"],
            hand_tip=joints["hand_tip"],
        )
