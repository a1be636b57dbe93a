"""Domain workflows over the data store, and the HTTP surface that serves them.

Everything a console needs goes through this API: patient intake, the
therapy catalog, running live sessions (with an NDJSON feed for real-time
display), session history, reference-vector building, score generation, and
the published-study reproduction. Domain logic stays in plain functions; the
FastAPI app is a thin translation layer mapping domain errors to statuses
(404 unknown id, 409 illegal state or conflict, 422 bad values).
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from fastapi import FastAPI
from fastapi.responses import JSONResponse, StreamingResponse
from pydantic import BaseModel, Field

from .catalog import THERAPIES, Therapy, get_therapy
from .live import LiveSessionManager
from .metrics import PMV_COMPONENTS, compute_pmv
from .patients import DuplicatePatientError
from .scoring import PatientScoreReport, build_rpmv, delta, score_sessions
from .session import (
    CalibrationError,
    SessionConfig,
    SessionMode,
    StateMachineError,
)
from .simulate import MotionProfile
from .stats import reproduce_study
from .storage import DataStore, StoredSession


def session_pmv(stored: StoredSession) -> np.ndarray:
    """Metrics vector of a stored session, from its therapy-angle column."""
    return compute_pmv(stored.theta_deg, stored.t_s)


def build_reference(
    store: DataStore, therapy_code: str, subject_ids: list[str]
) -> np.ndarray:
    """Build and persist the reference vector for a therapy.

    Uses every saved session of the named reference subjects for that
    therapy: per-subject session mean, median across subjects, normalized.

    Raises:
        ValueError: no subject has a stored session for the therapy.
    """
    get_therapy(therapy_code)
    by_subject: dict[str, list[np.ndarray]] = {}
    n_sessions = 0
    for sid in subject_ids:
        metas = store.sessions.list(patient_id=sid, therapy_code=therapy_code)
        pmvs = [session_pmv(store.sessions.load(m.session_id)) for m in metas]
        if pmvs:
            by_subject[sid] = pmvs
            n_sessions += len(pmvs)
    if not by_subject:
        raise ValueError(
            f"no stored sessions for therapy {therapy_code!r} among the "
            f"given subjects; record reference sessions first"
        )
    rpmv = build_rpmv(by_subject)
    store.rpmv.save(therapy_code, rpmv, len(by_subject), n_sessions)
    return rpmv


def generate_patient_score(
    store: DataStore, patient_id: str, therapy_code: str | None = None
) -> PatientScoreReport:
    """Score a patient's progress and persist the report.

    Scores every therapy with at least two saved sessions, or just the one
    requested (which must have at least two). Each therapy needs a stored
    reference vector.
    """
    store.patients.get(patient_id)
    if therapy_code is not None:
        get_therapy(therapy_code)
        codes = [therapy_code]
    else:
        codes = sorted({m.therapy_code for m in store.sessions.list(patient_id=patient_id)})
    therapy_scores = []
    for code in codes:
        metas = store.sessions.list(patient_id=patient_id, therapy_code=code)
        if len(metas) < 2:
            if therapy_code is not None:
                raise ValueError(
                    f"therapy {code!r} has {len(metas)} saved session(s) for "
                    f"this patient; scoring needs at least two"
                )
            continue
        rpmv = store.rpmv.load(code)
        deltas = [
            delta(session_pmv(store.sessions.load(m.session_id)), rpmv)
            for m in metas
        ]
        therapy_scores.append(score_sessions(deltas, therapy_code=code))
    report = PatientScoreReport(
        patient_id=patient_id, therapy_scores=tuple(therapy_scores)
    )
    store.scores.save(patient_id, report.to_dict())
    return report


def therapy_to_dict(t: Therapy) -> dict:
    return {
        "code": t.code,
        "name": t.name,
        "rom_min_deg": t.rom_min_deg,
        "rom_max_deg": t.rom_max_deg,
        "placement": t.placement.value,
        "angle": {
            "device": t.angle.device,
            "component": t.angle.component.value,
            "frame": t.angle.frame.value,
        },
        "base_posture": t.base_posture,
    }


class PatientIn(BaseModel):
    full_name: str
    birth_year: int
    age_years: int
    sex: str
    uld_duration_months: int
    affected_limb: str


class SessionIn(BaseModel):
    therapy_code: str
    duration_s: float
    mode: str = "active"
    patient_id: str | None = None
    amplitude_deg: float = Field(default=0.0, description="0 picks the approved RoM sine")
    frequency_hz: float = 0.5
    noise_sigma_deg: float = 0.0
    seed: int = 0


class EventIn(BaseModel):
    event: str


class RpmvIn(BaseModel):
    subject_ids: list[str]


class ScoreIn(BaseModel):
    patient_id: str
    therapy_code: str | None = None


def create_app(data_dir: Path | str, time_scale: float = 1.0) -> FastAPI:
    """Build the service around a data directory.

    time_scale > 1 makes live sessions run faster than real time; the
    protocol, states, and stored artifacts are identical.
    """
    store = DataStore(Path(data_dir))
    manager = LiveSessionManager(store, time_scale=time_scale)
    app = FastAPI(title="rehabmetrics", version="0.1.0")

    @app.exception_handler(KeyError)
    async def _not_found(request, exc):
        return JSONResponse(status_code=404, content={"detail": str(exc)})

    @app.exception_handler(DuplicatePatientError)
    async def _conflict_dup(request, exc):
        return JSONResponse(status_code=409, content={"detail": str(exc)})

    @app.exception_handler(StateMachineError)
    async def _conflict_state(request, exc):
        return JSONResponse(status_code=409, content={"detail": str(exc)})

    @app.exception_handler(CalibrationError)
    async def _conflict_cal(request, exc):
        return JSONResponse(status_code=409, content={"detail": str(exc)})

    @app.exception_handler(ValueError)
    async def _unprocessable(request, exc):
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.get("/therapies")
    def therapies():
        return [therapy_to_dict(t) for t in THERAPIES.values()]

    @app.post("/patients", status_code=201)
    def register_patient(body: PatientIn):
        rec = store.patients.register(
            full_name=body.full_name,
            birth_year=body.birth_year,
            age_years=body.age_years,
            sex=body.sex,
            uld_duration_months=body.uld_duration_months,
            affected_limb=body.affected_limb,
        )
        return rec.to_dict()

    @app.get("/patients")
    def list_patients():
        return [r.to_dict() for r in store.patients.list()]

    @app.get("/patients/{patient_id}")
    def get_patient(patient_id: str):
        return store.patients.get(patient_id).to_dict()

    @app.get("/patients/{patient_id}/history")
    def history(patient_id: str, therapy: str | None = None):
        store.patients.get(patient_id)
        metas = store.sessions.list(patient_id=patient_id, therapy_code=therapy)
        return [m.to_dict() for m in metas]

    @app.post("/sessions", status_code=201)
    def create_session(body: SessionIn):
        config = SessionConfig(
            therapy_code=body.therapy_code,
            duration_s=body.duration_s,
            mode=SessionMode(body.mode),
            patient_id=body.patient_id,
        )
        if body.patient_id is not None:
            store.patients.get(body.patient_id)
        therapy = get_therapy(body.therapy_code)
        amplitude = body.amplitude_deg if body.amplitude_deg > 0 else therapy.rom_deg
        profile = MotionProfile(
            therapy_code=body.therapy_code,
            amplitude_deg=amplitude,
            frequency_hz=body.frequency_hz,
            duration_s=body.duration_s,
            noise_sigma_deg=body.noise_sigma_deg,
        )
        session = manager.create(config, profile, seed=body.seed)
        return session.snapshot()

    @app.get("/sessions/{session_id}")
    def session_status(session_id: str):
        return manager.get(session_id).snapshot()

    @app.post("/sessions/{session_id}/events")
    def session_event(session_id: str, body: EventIn):
        session = manager.get(session_id)
        session.dispatch(body.event)
        return session.snapshot()

    @app.get("/sessions/{session_id}/live")
    def session_live(session_id: str):
        session = manager.get(session_id)
        return StreamingResponse(session.stream(), media_type="application/x-ndjson")

    @app.delete("/records/{session_id}", status_code=204)
    def delete_record(session_id: str):
        store.sessions.delete(session_id)

    @app.post("/rpmv/{therapy_code}")
    def rpmv_build(therapy_code: str, body: RpmvIn):
        vec = build_reference(store, therapy_code, body.subject_ids)
        return {"therapy_code": therapy_code, "rpmv": [float(x) for x in vec]}

    @app.get("/rpmv/{therapy_code}")
    def rpmv_get(therapy_code: str):
        get_therapy(therapy_code)
        vec = store.rpmv.load(therapy_code)
        return {
            "therapy_code": therapy_code,
            "components": list(PMV_COMPONENTS),
            "rpmv": [float(x) for x in vec],
        }

    @app.post("/scores")
    def scores(body: ScoreIn):
        report = generate_patient_score(store, body.patient_id, body.therapy_code)
        return report.to_dict()

    @app.get("/scores/{patient_id}")
    def get_scores(patient_id: str):
        return store.scores.load(patient_id)

    @app.get("/study/reproduce")
    def study():
        return reproduce_study().to_dict()

    return app
