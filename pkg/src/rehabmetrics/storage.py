"""On-disk layout and atomic persistence for sessions, references, and scores.

Layout under one data root:

    patients/<patient_id>.json      registry records
    sessions/<session_id>.csv       one row per 20 ms tick
    sessions/<session_id>.meta.json sidecar written BEFORE the csv
    rpmv/<therapy_code>.json        reference metrics vectors
    scores/<patient_id>.json        generated score reports

Both session files go through tempfile-plus-rename, sidecar first, so an
interrupted save can leave a sidecar without data but never data without a
sidecar; listing skips orphaned sidecars. Angles are stored with the same
two-decimal quantization as the wire protocol, so replaying a stored session
reproduces the captured frames exactly.
"""

from __future__ import annotations

import json
import os
import tempfile
import uuid
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .patients import PatientRegistry
from .session import SessionResult

CSV_HEADER = "t_ms,yaw1,pitch1,roll1,yaw2,pitch2,roll2,theta_deg"


def _atomic_write(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


@dataclass(frozen=True)
class SessionMeta:
    session_id: str
    patient_id: str | None
    therapy_code: str
    mode: str
    duration_s: float
    sample_rate_hz: float
    started_at: str
    baseline_device1: tuple[float, float, float]
    baseline_device2: tuple[float, float, float]
    n_rows: int
    rep_count: int

    def to_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "patient_id": self.patient_id,
            "therapy_code": self.therapy_code,
            "mode": self.mode,
            "duration_s": self.duration_s,
            "sample_rate_hz": self.sample_rate_hz,
            "started_at": self.started_at,
            "baseline": {
                "device1": list(self.baseline_device1),
                "device2": list(self.baseline_device2),
            },
            "n_rows": self.n_rows,
            "rep_count": self.rep_count,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SessionMeta":
        return cls(
            session_id=d["session_id"],
            patient_id=d.get("patient_id"),
            therapy_code=d["therapy_code"],
            mode=d["mode"],
            duration_s=float(d["duration_s"]),
            sample_rate_hz=float(d["sample_rate_hz"]),
            started_at=d["started_at"],
            baseline_device1=tuple(d["baseline"]["device1"]),
            baseline_device2=tuple(d["baseline"]["device2"]),
            n_rows=int(d["n_rows"]),
            rep_count=int(d["rep_count"]),
        )


@dataclass(frozen=True)
class StoredSession:
    meta: SessionMeta
    t_ms: np.ndarray
    angles: np.ndarray  # (n, 6): yaw1, pitch1, roll1, yaw2, pitch2, roll2
    theta_deg: np.ndarray

    @property
    def t_s(self) -> np.ndarray:
        return self.t_ms / 1000.0


class SessionStore:
    def __init__(self, root: Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def _csv_path(self, session_id: str) -> Path:
        return self.root / f"{session_id}.csv"

    def _meta_path(self, session_id: str) -> Path:
        return self.root / f"{session_id}.meta.json"

    def save(
        self,
        result: SessionResult,
        started_at: str | None = None,
        session_id: str | None = None,
    ) -> SessionMeta:
        """Persist a saved session; sidecar first, both renamed into place."""
        if not result.rows:
            raise ValueError("refusing to persist a session with no rows")
        assert result.baseline is not None
        meta = SessionMeta(
            session_id=session_id or uuid.uuid4().hex[:12],
            patient_id=result.config.patient_id,
            therapy_code=result.config.therapy_code,
            mode=result.config.mode.value,
            duration_s=result.config.duration_s,
            sample_rate_hz=50.0,
            started_at=started_at or datetime.now(timezone.utc).isoformat(),
            baseline_device1=result.baseline.device1,
            baseline_device2=result.baseline.device2,
            n_rows=len(result.rows),
            rep_count=result.rep_count,
        )
        lines = [CSV_HEADER]
        for r in result.rows:
            lines.append(
                f"{r.t_ms},{r.dev1.yaw:.2f},{r.dev1.pitch:.2f},{r.dev1.roll:.2f},"
                f"{r.dev2.yaw:.2f},{r.dev2.pitch:.2f},{r.dev2.roll:.2f},"
                f"{r.theta_deg:.2f}"
            )
        _atomic_write(self._meta_path(meta.session_id), json.dumps(meta.to_dict(), indent=2))
        _atomic_write(self._csv_path(meta.session_id), "\n".join(lines) + "\n")
        return meta

    def load(self, session_id: str) -> StoredSession:
        csv_path = self._csv_path(session_id)
        meta_path = self._meta_path(session_id)
        if not csv_path.exists() or not meta_path.exists():
            raise KeyError(f"unknown session id: {session_id!r}")
        meta = SessionMeta.from_dict(json.loads(meta_path.read_text()))
        raw = csv_path.read_text().strip().splitlines()
        if raw[0] != CSV_HEADER:
            raise ValueError(f"unexpected csv header in {csv_path.name}: {raw[0]!r}")
        data = np.array(
            [[float(x) for x in line.split(",")] for line in raw[1:]], dtype=float
        )
        if data.ndim != 2 or data.shape[1] != 8:
            raise ValueError(f"malformed session csv {csv_path.name}")
        return StoredSession(
            meta=meta,
            t_ms=data[:, 0].astype(int),
            angles=data[:, 1:7],
            theta_deg=data[:, 7],
        )

    def list(
        self, patient_id: str | None = None, therapy_code: str | None = None
    ) -> list[SessionMeta]:
        """Sessions sorted by start time. Sidecars without a data file are
        interrupted saves and are skipped."""
        metas = []
        for meta_path in self.root.glob("*.meta.json"):
            session_id = meta_path.name.removesuffix(".meta.json")
            if not self._csv_path(session_id).exists():
                continue
            meta = SessionMeta.from_dict(json.loads(meta_path.read_text()))
            if patient_id is not None and meta.patient_id != patient_id:
                continue
            if therapy_code is not None and meta.therapy_code != therapy_code:
                continue
            metas.append(meta)
        return sorted(metas, key=lambda m: (m.started_at, m.session_id))

    def delete(self, session_id: str) -> None:
        """Remove a record, data file first so no csv ever lacks a sidecar."""
        csv_path = self._csv_path(session_id)
        meta_path = self._meta_path(session_id)
        if not meta_path.exists():
            raise KeyError(f"unknown session id: {session_id!r}")
        if csv_path.exists():
            csv_path.unlink()
        meta_path.unlink()


class RpmvStore:
    """Reference metrics vectors, one JSON per therapy."""

    def __init__(self, root: Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def save(
        self, therapy_code: str, rpmv: np.ndarray, n_subjects: int, n_sessions: int
    ) -> None:
        doc = {
            "therapy_code": therapy_code,
            "rpmv": [float(x) for x in rpmv],
            "n_subjects": n_subjects,
            "n_sessions": n_sessions,
            "built_at": datetime.now(timezone.utc).isoformat(),
        }
        _atomic_write(self.root / f"{therapy_code}.json", json.dumps(doc, indent=2))

    def load(self, therapy_code: str) -> np.ndarray:
        path = self.root / f"{therapy_code}.json"
        if not path.exists():
            raise KeyError(f"no reference vector for therapy {therapy_code!r}")
        return np.array(json.loads(path.read_text())["rpmv"], dtype=float)

    def has(self, therapy_code: str) -> bool:
        return (self.root / f"{therapy_code}.json").exists()


class ScoreStore:
    def __init__(self, root: Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def save(self, patient_id: str, report: dict) -> None:
        doc = dict(report)
        doc["generated_at"] = datetime.now(timezone.utc).isoformat()
        _atomic_write(self.root / f"{patient_id}.json", json.dumps(doc, indent=2))

    def load(self, patient_id: str) -> dict:
        path = self.root / f"{patient_id}.json"
        if not path.exists():
            raise KeyError(f"no score report for patient {patient_id!r}")
        return json.loads(path.read_text())


class DataStore:
    """Everything the service persists, under one root directory."""

    def __init__(self, root: Path):
        self.root = Path(root)
        self.patients = PatientRegistry(self.root / "patients")
        self.sessions = SessionStore(self.root / "sessions")
        self.rpmv = RpmvStore(self.root / "rpmv")
        self.scores = ScoreStore(self.root / "scores")
