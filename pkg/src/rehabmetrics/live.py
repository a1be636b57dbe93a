"""Live session engine: real-time pacing, event dispatch, and the NDJSON feed.

Each live session owns a worker thread that walks the capture pipeline at
wall-clock speed (scaled by time_scale for tests and demos): the calibration
hold, the countdown, then the 50 Hz frame feed in 40 ms chunks. Client
events (start, stop, save, discard, abort) arrive through dispatch() under
the session lock; the stream() generator emits one JSON snapshot per line at
25 Hz, comfortably above the 10 Hz floor the console needs.

The frame source is the in-process simulator, so the no-frames watchdog
reduces to the timestamp-gap check inside the runner's feed.
"""

from __future__ import annotations

import json
import threading
import time
import uuid

from .catalog import Placement
from .kinematics import ArmModel
from .orientation import euler_to_quat
from .session import (
    CALIBRATION_WINDOW_S,
    COUNTDOWN_S,
    SessionConfig,
    SessionEvent,
    SessionRunner,
    SessionState,
    StateMachineError,
)
from .simulate import SAMPLE_RATE_HZ, MotionProfile, synthesize_session
from .storage import DataStore

STREAM_HZ = 25.0
_CHUNK_TICKS = 2  # 40 ms of session time per feed chunk

CLIENT_EVENTS = ("start", "stop", "save", "discard", "abort")


class LiveSession:
    """One session walking the pipeline in its own thread."""

    def __init__(
        self,
        config: SessionConfig,
        profile: MotionProfile,
        store: DataStore,
        seed: int = 0,
        time_scale: float = 1.0,
        lead_in_s: float = CALIBRATION_WINDOW_S,
    ):
        if time_scale <= 0:
            raise ValueError("time_scale must be positive")
        self.session_id = uuid.uuid4().hex[:12]
        self.config = config
        self.store = store
        self.time_scale = time_scale
        self.runner = SessionRunner(config)
        self.samples = synthesize_session(profile, seed=seed, lead_in_s=lead_in_s)
        self.saved_meta = None
        self.error: str | None = None
        self._arm = ArmModel()
        self._lock = threading.Lock()
        self._wake = threading.Condition(self._lock)
        self._resolution: str | None = None
        self._thread = threading.Thread(target=self._pipeline, daemon=True)
        self._thread.start()

    # Pipeline

    def _sleep(self, session_seconds: float) -> None:
        time.sleep(session_seconds / self.time_scale)

    def _pipeline(self) -> None:
        try:
            with self._lock:
                self.runner.connect()
            self._sleep(CALIBRATION_WINDOW_S)
            with self._lock:
                if self.state is not SessionState.CONNECTING:
                    return
                idx = self.runner.calibrate(self.samples)

            with self._wake:
                while self.state is SessionState.CALIBRATING:
                    self._wake.wait(timeout=0.05)
                if self.state is not SessionState.COUNTDOWN:
                    return

            self._sleep(COUNTDOWN_S)
            with self._lock:
                if self.state is not SessionState.COUNTDOWN:
                    return
                self.runner.machine.dispatch(SessionEvent.TIMER_EXPIRED)

            remaining = self.samples[idx:]
            chunk = _CHUNK_TICKS * 2  # two devices per tick
            pos = 0
            while pos < len(remaining):
                with self._lock:
                    if self.state is not SessionState.RUNNING:
                        break
                    self.runner.feed(remaining[pos : pos + chunk])
                pos += chunk
                self._sleep(_CHUNK_TICKS / SAMPLE_RATE_HZ)

            with self._wake:
                while self.state is SessionState.STOPPED and self._resolution is None:
                    self._wake.wait(timeout=0.05)
                resolution = self._resolution
                if self.state is not SessionState.STOPPED or resolution is None:
                    return
                result = self.runner.finish(save=resolution == "save")
                if resolution == "save":
                    self.saved_meta = self.store.sessions.save(
                        result, session_id=self.session_id
                    )
        except Exception as e:  # surfaced in snapshots; thread must not die silently
            self.error = str(e)
            with self._wake:
                if self.runner.machine.can(SessionEvent.ABORT):
                    self.runner.machine.dispatch(SessionEvent.ABORT)
                self._wake.notify_all()

    # Client side

    @property
    def state(self) -> SessionState:
        return self.runner.machine.state

    def dispatch(self, event_name: str) -> SessionState:
        """Apply a client event. Unknown names and illegal (state, event)
        pairs raise; save and discard are resolved by the worker thread."""
        if event_name not in CLIENT_EVENTS:
            raise ValueError(
                f"unknown event {event_name!r}; client events are {CLIENT_EVENTS}"
            )
        with self._wake:
            if event_name in ("save", "discard"):
                # Validates legality now; the worker performs the resolution.
                if not self.runner.machine.can(SessionEvent(event_name)):
                    raise StateMachineError(
                        f"illegal event {event_name!r} in state {self.state.value!r}"
                    )
                self._resolution = event_name
                self._wake.notify_all()
                return self.state
            new_state = self.runner.machine.dispatch(SessionEvent(event_name))
            self._wake.notify_all()
            return new_state

    def wait_for(self, *states: SessionState, timeout: float = 30.0) -> SessionState:
        """Block until the session reaches one of the states (for tests)."""
        deadline = time.monotonic() + timeout
        while time.monotonic() < deadline:
            if self.state in states or self.error:
                return self.state
            time.sleep(0.005)
        raise TimeoutError(f"session stuck in {self.state.value!r}")

    def snapshot(self) -> dict:
        with self._lock:
            rows = self.runner.rows
            last = rows[-1] if rows else None
            snap = {
                "session_id": self.session_id,
                "state": self.state.value,
                "therapy_code": self.config.therapy_code,
                "mode": self.config.mode.value,
                "patient_id": self.config.patient_id,
                "duration_s": self.config.duration_s,
                "elapsed_s": len(rows) / SAMPLE_RATE_HZ,
                "rep_count": self.runner.rep_count,
                "t_ms": last.t_ms if last else None,
                "theta_deg": round(last.theta_deg, 2) if last else None,
                "error": self.error,
                "pose": self._pose(last) if last else None,
            }
        return snap

    def _pose(self, row) -> dict:
        q1 = euler_to_quat(row.dev1.yaw, row.dev1.pitch, row.dev1.roll)
        if self.runner.therapy.placement is Placement.UPPER_ARM_ONLY:
            pose = self._arm.pose(q1)
        else:
            q2 = euler_to_quat(row.dev2.yaw, row.dev2.pitch, row.dev2.roll)
            pose = self._arm.pose(q1, q2)
        return {
            "shoulder": [round(float(x), 4) for x in pose.shoulder],
            "elbow": [round(float(x), 4) for x in pose.elbow],
            "wrist": [round(float(x), 4) for x in pose.wrist],
            "hand_tip": [round(float(x), 4) for x in pose.hand_tip],
        }

    def stream(self):
        """NDJSON snapshot generator at STREAM_HZ until the session ends."""
        terminal = (SessionState.SAVED, SessionState.DISCARDED, SessionState.IDLE)
        while True:
            snap = self.snapshot()
            yield (json.dumps(snap) + "\n").encode()
            if snap["state"] in tuple(s.value for s in terminal):
                return
            time.sleep(1.0 / STREAM_HZ)


class LiveSessionManager:
    """Registry of live sessions for the service layer."""

    def __init__(self, store: DataStore, time_scale: float = 1.0):
        self.store = store
        self.time_scale = time_scale
        self._sessions: dict[str, LiveSession] = {}
        self._lock = threading.Lock()

    def create(
        self,
        config: SessionConfig,
        profile: MotionProfile,
        seed: int = 0,
        lead_in_s: float = CALIBRATION_WINDOW_S,
    ) -> LiveSession:
        session = LiveSession(
            config,
            profile,
            self.store,
            seed=seed,
            time_scale=self.time_scale,
            lead_in_s=lead_in_s,
        )
        with self._lock:
            self._sessions[session.session_id] = session
        return session

    def get(self, session_id: str) -> LiveSession:
        with self._lock:
            try:
                return self._sessions[session_id]
            except KeyError:
                raise KeyError(f"unknown live session: {session_id!r}") from None
