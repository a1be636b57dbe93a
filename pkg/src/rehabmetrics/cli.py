"""Command-line entry points.

Exit codes: 0 success, 1 operation failure (domain error), 2 usage error.
Commands that produce data accept --json for machine-readable output.
"""

from __future__ import annotations

import json
from pathlib import Path

import click

from . import protocol
from .catalog import THERAPIES, get_therapy
from .metrics import PMV_COMPONENTS, compute_pmv
from .patients import DuplicatePatientError
from .service import (
    build_reference,
    create_app,
    generate_patient_score,
    session_pmv,
    therapy_to_dict,
)
from .session import (
    CALIBRATION_WINDOW_S,
    CalibrationError,
    DropoutError,
    SessionConfig,
    SessionMode,
    SessionRunner,
    StateMachineError,
)
from .simulate import MotionProfile, synthesize_session
from .stats import reproduce_study
from .storage import DataStore

_DOMAIN_ERRORS = (
    KeyError,
    ValueError,
    DuplicatePatientError,
    StateMachineError,
    CalibrationError,
    DropoutError,
)


def _fail(e: BaseException) -> "click.ClickException":
    msg = str(e)
    if isinstance(e, KeyError):
        msg = e.args[0] if e.args else msg
    return click.ClickException(str(msg))


@click.group()
def main():
    """Motion analytics for upper-limb rehabilitation."""


@main.command()
@click.option("--data-dir", type=click.Path(path_type=Path), default=Path("data"))
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
@click.option(
    "--time-scale",
    default=1.0,
    show_default=True,
    type=float,
    help="Run live sessions faster than real time (demos, tests).",
)
def serve(data_dir: Path, host: str, port: int, time_scale: float):
    """Run the HTTP service."""
    import uvicorn

    app = create_app(data_dir, time_scale=time_scale)
    uvicorn.run(app, host=host, port=port)


@main.command()
@click.option("--json", "as_json", is_flag=True)
def therapies(as_json: bool):
    """List the therapy catalog."""
    if as_json:
        click.echo(json.dumps([therapy_to_dict(t) for t in THERAPIES.values()]))
        return
    for t in THERAPIES.values():
        rom = (
            f"{t.rom_min_deg:g}"
            if t.rom_min_deg == t.rom_max_deg
            else f"{t.rom_min_deg:g}-{t.rom_max_deg:g}"
        )
        click.echo(f"{t.code:5s} {t.name:40s} RoM {rom:>7s} deg  {t.placement.value}")


@main.group()
def patient():
    """Patient registry."""


@patient.command("add")
@click.option("--data-dir", type=click.Path(path_type=Path), default=Path("data"))
@click.option("--name", "full_name", required=True)
@click.option("--birth-year", required=True, type=int)
@click.option("--age", "age_years", required=True, type=int)
@click.option("--sex", required=True, type=click.Choice(["F", "M"]))
@click.option("--uld-months", "uld_duration_months", required=True, type=int)
@click.option("--limb", "affected_limb", required=True, type=click.Choice(["Left", "Right"]))
@click.option("--json", "as_json", is_flag=True)
def patient_add(data_dir, full_name, birth_year, age_years, sex, uld_duration_months, affected_limb, as_json):
    """Register a patient."""
    store = DataStore(data_dir)
    try:
        rec = store.patients.register(
            full_name=full_name,
            birth_year=birth_year,
            age_years=age_years,
            sex=sex,
            uld_duration_months=uld_duration_months,
            affected_limb=affected_limb,
        )
    except _DOMAIN_ERRORS as e:
        raise _fail(e)
    if as_json:
        click.echo(json.dumps(rec.to_dict()))
    else:
        click.echo(f"registered {rec.patient_id} ({rec.full_name})")


@patient.command("list")
@click.option("--data-dir", type=click.Path(path_type=Path), default=Path("data"))
@click.option("--json", "as_json", is_flag=True)
def patient_list(data_dir, as_json):
    store = DataStore(data_dir)
    recs = store.patients.list()
    if as_json:
        click.echo(json.dumps([r.to_dict() for r in recs]))
        return
    for r in recs:
        click.echo(
            f"{r.patient_id}  {r.full_name:24s} age {r.age_years:3d}  "
            f"{r.sex.value}  ULD {r.uld_duration_months} mo  {r.affected_limb.value}"
        )


@main.command()
@click.option("--therapy", "therapy_code", required=True)
@click.option("--amplitude", "amplitude_deg", type=float, default=0.0, help="0 = approved RoM")
@click.option("--frequency", "frequency_hz", type=float, default=0.5, show_default=True)
@click.option("--duration", "duration_s", type=float, required=True)
@click.option("--noise", "noise_sigma_deg", type=float, default=0.0, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--lead-in", "lead_in_s", type=float, default=0.0, show_default=True)
@click.option("--out", type=click.Path(path_type=Path), default=None, help="Write frames here instead of stdout.")
def simulate(therapy_code, amplitude_deg, frequency_hz, duration_s, noise_sigma_deg, seed, lead_in_s, out):
    """Emit a simulated wire-protocol frame stream."""
    try:
        therapy = get_therapy(therapy_code)
        amplitude = amplitude_deg if amplitude_deg > 0 else therapy.rom_deg
        profile = MotionProfile(
            therapy_code=therapy_code,
            amplitude_deg=amplitude,
            frequency_hz=frequency_hz,
            duration_s=duration_s,
            noise_sigma_deg=noise_sigma_deg,
        )
        samples = synthesize_session(profile, seed=seed, lead_in_s=lead_in_s)
    except _DOMAIN_ERRORS as e:
        raise _fail(e)
    payload = b"".join(
        [protocol.encode(protocol.Hello(protocol.PROTOCOL_VERSION))]
        + [protocol.encode(s) for s in samples]
        + [protocol.encode(protocol.Bye())]
    )
    if out is None:
        click.echo(payload.decode("ascii"), nl=False)
    else:
        out.write_bytes(payload)
        click.echo(f"wrote {len(samples)} samples to {out}")


@main.command()
@click.option("--data-dir", type=click.Path(path_type=Path), default=Path("data"))
@click.option("--patient", "patient_id", required=True)
@click.option("--therapy", "therapy_code", required=True)
@click.option("--duration", "duration_s", type=float, required=True)
@click.option("--amplitude", "amplitude_deg", type=float, default=0.0, help="0 = approved RoM")
@click.option("--frequency", "frequency_hz", type=float, default=0.5, show_default=True)
@click.option("--noise", "noise_sigma_deg", type=float, default=0.0, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--discard", is_flag=True, help="Run the session but discard instead of saving.")
@click.option("--json", "as_json", is_flag=True)
def record(data_dir, patient_id, therapy_code, duration_s, amplitude_deg, frequency_hz, noise_sigma_deg, seed, discard, as_json):
    """Run one simulated session end to end and save it."""
    store = DataStore(data_dir)
    try:
        store.patients.get(patient_id)
        therapy = get_therapy(therapy_code)
        amplitude = amplitude_deg if amplitude_deg > 0 else therapy.rom_deg
        config = SessionConfig(
            therapy_code=therapy_code,
            duration_s=duration_s,
            mode=SessionMode.ACTIVE,
            patient_id=patient_id,
        )
        profile = MotionProfile(
            therapy_code=therapy_code,
            amplitude_deg=amplitude,
            frequency_hz=frequency_hz,
            duration_s=duration_s,
            noise_sigma_deg=noise_sigma_deg,
        )
        samples = synthesize_session(profile, seed=seed, lead_in_s=CALIBRATION_WINDOW_S)
        result = SessionRunner(config).run(samples, save=not discard)
        if discard:
            click.echo("session discarded, nothing stored")
            return
        meta = store.sessions.save(result)
    except _DOMAIN_ERRORS as e:
        raise _fail(e)
    if as_json:
        click.echo(json.dumps(meta.to_dict()))
    else:
        click.echo(
            f"saved session {meta.session_id}: {meta.n_rows} rows, "
            f"{meta.rep_count} reps"
        )


@main.command()
@click.option("--data-dir", type=click.Path(path_type=Path), default=Path("data"))
@click.argument("session_id")
@click.option("--json", "as_json", is_flag=True)
def replay(data_dir, session_id, as_json):
    """Recompute movement metrics from a stored session."""
    store = DataStore(data_dir)
    try:
        stored = store.sessions.load(session_id)
        pmv = compute_pmv(stored.theta_deg, stored.t_s)
    except _DOMAIN_ERRORS as e:
        raise _fail(e)
    if as_json:
        click.echo(
            json.dumps(
                {
                    "session_id": session_id,
                    "therapy_code": stored.meta.therapy_code,
                    "pmv": dict(zip(PMV_COMPONENTS, [float(x) for x in pmv])),
                }
            )
        )
        return
    click.echo(f"session {session_id} ({stored.meta.therapy_code}):")
    for name, value in zip(PMV_COMPONENTS, pmv):
        click.echo(f"  {name:10s} {value:10.3f}")


@main.group()
def rpmv():
    """Reference metrics vectors."""


@rpmv.command("build")
@click.option("--data-dir", type=click.Path(path_type=Path), default=Path("data"))
@click.option("--therapy", "therapy_code", required=True)
@click.option("--subjects", required=True, help="Comma-separated reference subject ids.")
@click.option("--json", "as_json", is_flag=True)
def rpmv_build(data_dir, therapy_code, subjects, as_json):
    store = DataStore(data_dir)
    try:
        vec = build_reference(store, therapy_code, subjects.split(","))
    except _DOMAIN_ERRORS as e:
        raise _fail(e)
    if as_json:
        click.echo(json.dumps({"therapy_code": therapy_code, "rpmv": [float(x) for x in vec]}))
    else:
        click.echo(f"built reference for {therapy_code}: {np_fmt(vec)}")


@rpmv.command("show")
@click.option("--data-dir", type=click.Path(path_type=Path), default=Path("data"))
@click.option("--therapy", "therapy_code", required=True)
@click.option("--json", "as_json", is_flag=True)
def rpmv_show(data_dir, therapy_code, as_json):
    store = DataStore(data_dir)
    try:
        vec = store.rpmv.load(therapy_code)
    except _DOMAIN_ERRORS as e:
        raise _fail(e)
    if as_json:
        click.echo(json.dumps({"therapy_code": therapy_code, "rpmv": [float(x) for x in vec]}))
    else:
        click.echo(f"{therapy_code}: {np_fmt(vec)}")


def np_fmt(vec) -> str:
    return "[" + ", ".join(f"{float(x):.4f}" for x in vec) + "]"


@main.command()
@click.option("--data-dir", type=click.Path(path_type=Path), default=Path("data"))
@click.option("--patient", "patient_id", required=True)
@click.option("--therapy", "therapy_code", default=None)
@click.option("--json", "as_json", is_flag=True)
def score(data_dir, patient_id, therapy_code, as_json):
    """Generate a progress score report for a patient."""
    store = DataStore(data_dir)
    try:
        report = generate_patient_score(store, patient_id, therapy_code)
    except _DOMAIN_ERRORS as e:
        raise _fail(e)
    if as_json:
        click.echo(json.dumps(report.to_dict()))
        return
    click.echo(f"patient {patient_id}:")
    for ts in report.therapy_scores:
        click.echo(
            f"  {ts.therapy_code:5s} score {ts.score:.3f} / 2  "
            f"(+{ts.n_positive} ={ts.n_neutral} -{ts.n_negative} over {ts.n_considered} pairs)"
        )
    click.echo(f"  total {report.total:.3f} / {report.max_total:.0f}")


@main.group()
def stats():
    """Study statistics."""


@stats.command("reproduce")
@click.option("--json", "as_json", is_flag=True)
def stats_reproduce(as_json):
    """Recompute the published system-vs-therapist comparison."""
    s = reproduce_study()
    if as_json:
        click.echo(json.dumps(s.to_dict()))
        return
    click.echo(f"system mean     {s.system_mean:.5f}")
    click.echo(f"therapist mean  {s.pt_mean:.5f}")
    click.echo(f"paired t({s.t_df}) = {s.t:.4f}, two-tailed p = {s.t_p:.5f}")
    click.echo(f"variance ratio F = {s.f:.5f}, one-tailed p = {s.f_p:.5f}")
    click.echo(f"pearson r = {s.r:.6f}, r^2 = {s.r_squared:.6f}")
    click.echo(
        f"percent deviation: min {s.deviation_min:+.2f}%, max {s.deviation_max:+.2f}%"
    )


if __name__ == "__main__":
    main()
