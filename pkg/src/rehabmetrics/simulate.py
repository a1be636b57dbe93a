"""Simulated two-sensor capture: deterministic frame streams for tests and demos.

The motion model is a sinusoid written into the Euler component the therapy
catalog names for that exercise; the other device (and the other components)
hold still apart from optional measurement noise. Frames come out exactly as
the hardware would send them: one sample per device per 20 ms tick.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import pi, sin

import numpy as np

from .catalog import AngleComponent, Therapy, get_therapy
from .protocol import Sample

SAMPLE_RATE_HZ = 50.0
TICK_MS = 20


@dataclass(frozen=True)
class MotionProfile:
    """What the simulated limb does.

    amplitude_deg is the sine amplitude of the therapy angle, so a profile
    with amplitude 40 swings between -40 and +40 degrees. noise_sigma_deg
    adds i.i.d. Gaussian noise to every reported component of both devices.
    """

    therapy_code: str
    amplitude_deg: float
    frequency_hz: float
    duration_s: float
    noise_sigma_deg: float = 0.0
    phase_rad: float = 0.0

    def __post_init__(self):
        if self.amplitude_deg < 0:
            raise ValueError("amplitude_deg must be non-negative")
        if self.frequency_hz <= 0:
            raise ValueError("frequency_hz must be positive")
        if self.duration_s <= 0:
            raise ValueError("duration_s must be positive")
        if self.noise_sigma_deg < 0:
            raise ValueError("noise_sigma_deg must be non-negative")


def _component_index(component: AngleComponent) -> int:
    return {"yaw": 0, "pitch": 1, "roll": 2}[component.value]


def synthesize_session(
    profile: MotionProfile, seed: int = 0, lead_in_s: float = 0.0
) -> list[Sample]:
    """Generate the full frame stream for one session.

    An optional static lead-in precedes the motion so calibration-window
    logic can run against realistic streams. Timestamps start at 0 at the
    head of the lead-in. Returns samples interleaved per tick: device 1
    then device 2.

    Args:
        profile: motion description; the therapy code picks which device
            and Euler component carry the angle.
        seed: RNG seed for the noise; streams are reproducible.
        lead_in_s: seconds of stillness before the sine starts.
    """
    therapy = get_therapy(profile.therapy_code)
    rng = np.random.default_rng(seed)
    comp = _component_index(therapy.angle.component)
    moving_device = therapy.angle.device

    n_lead = int(round(lead_in_s * SAMPLE_RATE_HZ))
    n_move = int(round(profile.duration_s * SAMPLE_RATE_HZ))
    out: list[Sample] = []
    for i in range(n_lead + n_move):
        t_ms = i * TICK_MS
        if i < n_lead:
            theta = 0.0
        else:
            t = (i - n_lead) / SAMPLE_RATE_HZ
            theta = profile.amplitude_deg * sin(
                2.0 * pi * profile.frequency_hz * t + profile.phase_rad
            )
        for device in (1, 2):
            angles = [0.0, 0.0, 0.0]
            if device == moving_device:
                angles[comp] = theta
            if profile.noise_sigma_deg > 0:
                angles = [
                    a + rng.normal(0.0, profile.noise_sigma_deg) for a in angles
                ]
            out.append(
                Sample(
                    t_ms=t_ms,
                    device=device,
                    yaw=angles[0],
                    pitch=angles[1],
                    roll=angles[2],
                )
            )
    return out


def pair_ticks(samples: list[Sample]) -> list[tuple[int, Sample, Sample]]:
    """Group an interleaved stream into (t_ms, device1, device2) rows.

    Ticks missing either device are dropped; downstream treats such holes
    as transmission gaps.
    """
    by_tick: dict[int, dict[int, Sample]] = {}
    for s in samples:
        by_tick.setdefault(s.t_ms, {})[s.device] = s
    rows = []
    for t_ms in sorted(by_tick):
        pair = by_tick[t_ms]
        if 1 in pair and 2 in pair:
            rows.append((t_ms, pair[1], pair[2]))
    return rows


def therapy_angle(therapy: Therapy, dev1: Sample, dev2: Sample) -> float:
    """Extract the therapy angle from one tick's pair of samples.

    The wire carries per-device Euler triples, so the relative frame is the
    circular difference of the named component (device 2 minus device 1),
    wrapped to [-180, 180). Absolute frame reads the component off the
    catalog's device directly.
    """
    comp = therapy.angle.component.value
    if therapy.angle.frame.value == "absolute":
        src = dev1 if therapy.angle.device == 1 else dev2
        return getattr(src, comp)
    raw = getattr(dev2, comp) - getattr(dev1, comp)
    return (raw + 180.0) % 360.0 - 180.0
