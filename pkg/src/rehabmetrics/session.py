"""Session lifecycle: the capture state machine, calibration, and the runner.

A session walks a fixed state graph:

    Idle -> Connecting -> Calibrating -> Countdown -> Running -> Stopped
                                                  -> Saved | Discarded

driven by eight events; every (state, event) pair outside the table is a
protocol error that names the pair. `abort` is legal everywhere and returns
to Idle. Saving is only legal for Active (patient-attached) sessions;
Passive runs are visualization-only and can only be discarded.

The runner here is headless and pure: it consumes a prerecorded or simulated
frame stream and drives the machine through the full lifecycle without
touching the wall clock (the countdown state is entered and exited
logically). Interactive pacing and the dropout watchdog live in the service
layer on top.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .catalog import Therapy, get_therapy
from .metrics import LiveRepCounter
from .orientation import wrap_180
from .protocol import Sample
from .simulate import SAMPLE_RATE_HZ, pair_ticks, therapy_angle

COUNTDOWN_S = 10.0
CALIBRATION_WINDOW_S = 8.0
CALIBRATION_STILL_TOL_DEG = 2.0
MAX_DURATION_S = 1800.0
DROPOUT_GAP_MS = 2000


class SessionState(Enum):
    IDLE = "idle"
    CONNECTING = "connecting"
    CALIBRATING = "calibrating"
    COUNTDOWN = "countdown"
    RUNNING = "running"
    STOPPED = "stopped"
    SAVED = "saved"
    DISCARDED = "discarded"


class SessionEvent(Enum):
    CONNECT = "connect"
    CALIBRATED = "calibrated"
    START = "start"
    TIMER_EXPIRED = "timer_expired"
    STOP = "stop"
    SAVE = "save"
    DISCARD = "discard"
    ABORT = "abort"


class SessionMode(Enum):
    ACTIVE = "active"
    PASSIVE = "passive"


class StateMachineError(RuntimeError):
    """Illegal (state, event) dispatch; the message names both."""


class CalibrationError(RuntimeError):
    pass


class DropoutError(RuntimeError):
    pass


_BASE_TRANSITIONS: dict[tuple[SessionState, SessionEvent], SessionState] = {
    (SessionState.IDLE, SessionEvent.CONNECT): SessionState.CONNECTING,
    (SessionState.CONNECTING, SessionEvent.CALIBRATED): SessionState.CALIBRATING,
    (SessionState.CALIBRATING, SessionEvent.START): SessionState.COUNTDOWN,
    (SessionState.COUNTDOWN, SessionEvent.TIMER_EXPIRED): SessionState.RUNNING,
    (SessionState.RUNNING, SessionEvent.TIMER_EXPIRED): SessionState.STOPPED,
    (SessionState.RUNNING, SessionEvent.STOP): SessionState.STOPPED,
    (SessionState.STOPPED, SessionEvent.SAVE): SessionState.SAVED,
    (SessionState.STOPPED, SessionEvent.DISCARD): SessionState.DISCARDED,
}


def legal_transitions(
    mode: SessionMode,
) -> dict[tuple[SessionState, SessionEvent], SessionState]:
    """The full transition table for a mode, abort rows included."""
    table = dict(_BASE_TRANSITIONS)
    if mode is SessionMode.PASSIVE:
        del table[(SessionState.STOPPED, SessionEvent.SAVE)]
    for s in SessionState:
        table[(s, SessionEvent.ABORT)] = SessionState.IDLE
    return table


class SessionStateMachine:
    """Mode-aware state machine; dispatch returns the new state."""

    def __init__(self, mode: SessionMode = SessionMode.ACTIVE):
        self.mode = mode
        self.state = SessionState.IDLE
        self._table = legal_transitions(mode)
        self.trace: list[SessionState] = [self.state]

    def can(self, event: SessionEvent) -> bool:
        return (self.state, event) in self._table

    def dispatch(self, event: SessionEvent) -> SessionState:
        key = (self.state, event)
        if key not in self._table:
            raise StateMachineError(
                f"illegal event {event.value!r} in state {self.state.value!r}"
            )
        self.state = self._table[key]
        self.trace.append(self.state)
        return self.state


@dataclass(frozen=True)
class SessionConfig:
    therapy_code: str
    duration_s: float
    mode: SessionMode = SessionMode.ACTIVE
    patient_id: str | None = None

    def __post_init__(self):
        get_therapy(self.therapy_code)
        if not 0 < self.duration_s <= MAX_DURATION_S:
            raise ValueError(
                f"duration_s must be in (0, {MAX_DURATION_S:g}], got {self.duration_s}"
            )
        if self.mode is SessionMode.ACTIVE and not self.patient_id:
            raise ValueError("active sessions need a patient_id")


def circular_mean_deg(values) -> float:
    v = np.radians(np.asarray(values, dtype=float))
    return math.degrees(math.atan2(float(np.mean(np.sin(v))), float(np.mean(np.cos(v)))))


@dataclass(frozen=True)
class Baseline:
    """Per-device still-pose angles subtracted from everything that follows."""

    device1: tuple[float, float, float]
    device2: tuple[float, float, float]

    def subtract(self, s: Sample) -> Sample:
        ref = self.device1 if s.device == 1 else self.device2
        return Sample(
            t_ms=s.t_ms,
            device=s.device,
            yaw=wrap_180(s.yaw - ref[0]),
            pitch=wrap_180(s.pitch - ref[1]),
            roll=wrap_180(s.roll - ref[2]),
        )


def find_calibration(
    samples: list[Sample],
    window_s: float = CALIBRATION_WINDOW_S,
    still_tol_deg: float = CALIBRATION_STILL_TOL_DEG,
) -> tuple[Baseline, int]:
    """Locate the still-hold window at the head of a stream.

    The subject holds the base posture for at least window_s; stillness
    means every Euler component of both devices stays within still_tol_deg
    of its circular mean over the window. Returns the baseline and the
    index of the first sample after the window.

    Raises:
        CalibrationError: stream too short or the subject moved.
    """
    rows = pair_ticks(samples)
    need = int(round(window_s * SAMPLE_RATE_HZ))
    if len(rows) < need:
        raise CalibrationError(
            f"need {window_s:g}s of frames to calibrate, got {len(rows) / SAMPLE_RATE_HZ:g}s"
        )
    window = rows[:need]
    means = {}
    for dev in (1, 2):
        comps = []
        for name in ("yaw", "pitch", "roll"):
            vals = [getattr(r[dev], name) for r in window]
            m = circular_mean_deg(vals)
            spread = max(abs(wrap_180(v - m)) for v in vals)
            if spread > still_tol_deg:
                raise CalibrationError(
                    f"device {dev} {name} moved {spread:.2f} deg during the "
                    f"calibration hold (tolerance {still_tol_deg:g})"
                )
            comps.append(m)
        means[dev] = tuple(comps)
    baseline = Baseline(device1=means[1], device2=means[2])
    cutoff_ms = window[-1][0]
    first_after = next(
        (i for i, s in enumerate(samples) if s.t_ms > cutoff_ms), len(samples)
    )
    return baseline, first_after


@dataclass
class SessionRow:
    t_ms: int
    dev1: Sample
    dev2: Sample
    theta_deg: float


@dataclass
class SessionResult:
    config: SessionConfig
    therapy: Therapy
    baseline: Baseline
    rows: list[SessionRow]
    rep_count: int
    state_trace: list[SessionState]
    final_state: SessionState


class SessionRunner:
    """Drives one session end to end over a prerecorded frame stream.

    The stream must begin with the calibration still-hold. The runner
    consumes exactly duration_s worth of ticks for the Running phase (the
    timer event fires on the last one); a shorter stream leaves the machine
    Running and `stop()` ends the session early with the rows collected so
    far. Timestamp gaps larger than DROPOUT_GAP_MS during Running abort the
    session.
    """

    def __init__(self, config: SessionConfig):
        self.config = config
        self.therapy = get_therapy(config.therapy_code)
        self.machine = SessionStateMachine(config.mode)
        self.baseline: Baseline | None = None
        self.rows: list[SessionRow] = []
        self._counter = LiveRepCounter(self.therapy.rom_deg)
        self._target_rows = int(round(config.duration_s * SAMPLE_RATE_HZ))

    @property
    def rep_count(self) -> int:
        return self._counter.count

    def connect(self) -> None:
        self.machine.dispatch(SessionEvent.CONNECT)

    def calibrate(self, samples: list[Sample]) -> int:
        """Consume the still-hold head of the stream; returns the index of
        the first unconsumed sample."""
        self.baseline, first_after = find_calibration(samples)
        self.machine.dispatch(SessionEvent.CALIBRATED)
        return first_after

    def start(self) -> None:
        """Start the session. The countdown is logical here: the state is
        entered and the timer event fires immediately."""
        self.machine.dispatch(SessionEvent.START)
        self.machine.dispatch(SessionEvent.TIMER_EXPIRED)

    def feed(self, samples: list[Sample]) -> None:
        """Process capture frames while Running.

        Fires the session timer (Running -> Stopped) once duration_s worth
        of ticks have been collected; surplus frames are ignored.
        """
        if self.machine.state is not SessionState.RUNNING:
            raise StateMachineError(
                f"cannot feed frames in state {self.machine.state.value!r}"
            )
        if self.baseline is None:
            raise CalibrationError("session was never calibrated")
        for t_ms, d1, d2 in pair_ticks(samples):
            if self.machine.state is not SessionState.RUNNING:
                break
            if self.rows and t_ms - self.rows[-1].t_ms > DROPOUT_GAP_MS:
                self.machine.dispatch(SessionEvent.ABORT)
                raise DropoutError(
                    f"no frames for {(t_ms - self.rows[-1].t_ms) / 1000:.1f}s "
                    f"(last tick {self.rows[-1].t_ms} ms, next {t_ms} ms)"
                )
            b1 = self.baseline.subtract(d1)
            b2 = self.baseline.subtract(d2)
            theta = therapy_angle(self.therapy, b1, b2)
            self.rows.append(SessionRow(t_ms=t_ms, dev1=b1, dev2=b2, theta_deg=theta))
            self._counter.update(theta)
            if len(self.rows) >= self._target_rows:
                self.machine.dispatch(SessionEvent.TIMER_EXPIRED)

    def stop(self) -> None:
        self.machine.dispatch(SessionEvent.STOP)

    def finish(self, save: bool) -> SessionResult:
        """Resolve a Stopped session as saved or discarded and freeze the
        result. Discarded results keep no rows."""
        event = SessionEvent.SAVE if save else SessionEvent.DISCARD
        self.machine.dispatch(event)
        rows = self.rows if save else []
        if not save:
            self.rows = []
        return SessionResult(
            config=self.config,
            therapy=self.therapy,
            baseline=self.baseline,
            rows=rows,
            rep_count=self.rep_count,
            state_trace=list(self.machine.trace),
            final_state=self.machine.state,
        )

    def run(self, samples: list[Sample], save: bool = True) -> SessionResult:
        """Full lifecycle over one stream: connect, calibrate, run, resolve."""
        self.connect()
        idx = self.calibrate(samples)
        self.start()
        self.feed(samples[idx:])
        if self.machine.state is SessionState.RUNNING:
            self.stop()
        return self.finish(save=save)
