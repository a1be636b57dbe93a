"""Therapy catalog: the fixed set of upper-limb interventions the system administers.

Each entry pins the medically approved range of motion, the sensor placement the
exercise requires, and which Euler component of which device carries the therapy
angle. The catalog is frozen data shipped with the package; code never mutates it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from importlib import resources


class Placement(Enum):
    """Where the second sensor is worn. The first is always on the upper arm."""

    HAND_DORSUM = "hand_dorsum"
    FOREARM = "forearm"
    UPPER_ARM_ONLY = "upper_arm_only"


class AngleComponent(Enum):
    YAW = "yaw"
    PITCH = "pitch"
    ROLL = "roll"


class AngleFrame(Enum):
    """Absolute: device Euler angle as-is. Relative: device 2 minus device 1."""

    ABSOLUTE = "absolute"
    RELATIVE = "relative"


@dataclass(frozen=True)
class AngleDescriptor:
    """Which signal is the therapy angle.

    device: 1 (upper arm) or 2 (hand dorsum / forearm).
    component: Euler component read from the wire frames.
    frame: absolute device angle, or circular difference device2 - device1.
    """

    device: int
    component: AngleComponent
    frame: AngleFrame


@dataclass(frozen=True)
class Therapy:
    code: str
    name: str
    rom_min_deg: float
    rom_max_deg: float
    placement: Placement
    angle: AngleDescriptor
    base_posture: str

    @property
    def rom_deg(self) -> float:
        """Scalar approved RoM: the lower bound of the approved range."""
        return self.rom_min_deg


def _load() -> dict[str, Therapy]:
    raw = json.loads(
        resources.files("rehabmetrics.data").joinpath("therapies.json").read_text()
    )
    out = {}
    for code, row in raw.items():
        out[code] = Therapy(
            code=code,
            name=row["name"],
            rom_min_deg=float(row["rom_min_deg"]),
            rom_max_deg=float(row["rom_max_deg"]),
            placement=Placement(row["placement"]),
            angle=AngleDescriptor(
                device=int(row["angle_device"]),
                component=AngleComponent(row["angle_component"]),
                frame=AngleFrame(row["angle_frame"]),
            ),
            base_posture=row["base_posture"],
        )
    return out


THERAPIES: dict[str, Therapy] = _load()

THERAPY_CODES: tuple[str, ...] = tuple(THERAPIES)


def get_therapy(code: str) -> Therapy:
    """Look up a therapy by code; raises KeyError with the bad code for typos."""
    try:
        return THERAPIES[code]
    except KeyError:
        raise KeyError(f"unknown therapy code: {code!r}") from None
