import json

import pytest
from click.testing import CliRunner

from rehabmetrics.cli import main

pytestmark = []


@pytest.fixture
def runner():
    return CliRunner()


def _add_patient(runner, data_dir, name="Pat One", birth_year=1972):
    r = runner.invoke(
        main,
        [
            "patient",
            "add",
            "--data-dir",
            str(data_dir),
            "--name",
            name,
            "--birth-year",
            str(birth_year),
            "--age",
            "54",
            "--sex",
            "M",
            "--uld-months",
            "18",
            "--limb",
            "Left",
            "--json",
        ],
    )
    assert r.exit_code == 0, r.output
    return json.loads(r.output)["patient_id"]


def _record(runner, data_dir, pid, therapy="WF", duration="10", amplitude="40", seed="0"):
    r = runner.invoke(
        main,
        [
            "record",
            "--data-dir",
            str(data_dir),
            "--patient",
            pid,
            "--therapy",
            therapy,
            "--duration",
            duration,
            "--amplitude",
            amplitude,
            "--seed",
            seed,
            "--json",
        ],
    )
    assert r.exit_code == 0, r.output
    return json.loads(r.output)


def test_therapies_table_and_json(runner):
    r = runner.invoke(main, ["therapies"])
    assert r.exit_code == 0
    assert "WF" in r.output and "hand_dorsum" in r.output
    assert len(r.output.strip().splitlines()) == 16
    r = runner.invoke(main, ["therapies", "--json"])
    codes = {t["code"] for t in json.loads(r.output)}
    assert len(codes) == 16 and "SIRV" in codes


def test_patient_add_and_list(runner, tmp_path):
    pid = _add_patient(runner, tmp_path)
    r = runner.invoke(main, ["patient", "list", "--data-dir", str(tmp_path), "--json"])
    assert r.exit_code == 0
    recs = json.loads(r.output)
    assert [rec["patient_id"] for rec in recs] == [pid]
    # duplicate is a domain error -> exit 1
    r = runner.invoke(
        main,
        [
            "patient",
            "add",
            "--data-dir",
            str(tmp_path),
            "--name",
            "pat   one",
            "--birth-year",
            "1972",
            "--age",
            "54",
            "--sex",
            "M",
            "--uld-months",
            "18",
            "--limb",
            "Left",
        ],
    )
    assert r.exit_code == 1
    assert "already registered" in r.output


def test_usage_errors_exit_2(runner):
    assert runner.invoke(main, ["patient", "add"]).exit_code == 2  # missing options
    assert runner.invoke(main, ["no-such-command"]).exit_code == 2


def test_simulate_stream_shape(runner):
    r = runner.invoke(main, ["simulate", "--therapy", "WF", "--duration", "2"])
    assert r.exit_code == 0
    lines = r.output.strip().splitlines()
    assert lines[0] == "HELLO,1"
    assert lines[-1] == "BYE"
    samples = lines[1:-1]
    assert len(samples) == 200  # 2 s * 50 Hz * 2 devices
    assert all(line.startswith("SAMPLE,") for line in samples)


def test_simulate_to_file(runner, tmp_path):
    out = tmp_path / "frames.txt"
    r = runner.invoke(
        main,
        ["simulate", "--therapy", "EF", "--duration", "1", "--out", str(out)],
    )
    assert r.exit_code == 0
    assert "wrote 100 samples" in r.output
    assert out.read_bytes().startswith(b"HELLO,1\n")


def test_simulate_unknown_therapy(runner):
    r = runner.invoke(main, ["simulate", "--therapy", "ZZ", "--duration", "2"])
    assert r.exit_code == 1
    assert "ZZ" in r.output


def test_record_and_replay(runner, tmp_path):
    pid = _add_patient(runner, tmp_path)
    meta = _record(runner, tmp_path, pid)
    assert meta["n_rows"] == 500
    assert meta["rep_count"] == 5
    csv = tmp_path / "sessions" / f"{meta['session_id']}.csv"
    sidecar = tmp_path / "sessions" / f"{meta['session_id']}.meta.json"
    assert csv.exists() and sidecar.exists()

    r = runner.invoke(
        main, ["replay", "--data-dir", str(tmp_path), meta["session_id"], "--json"]
    )
    assert r.exit_code == 0, r.output
    pmv = json.loads(r.output)["pmv"]
    assert pmv["amplitude"] == pytest.approx(40.0, abs=0.5)
    assert pmv["rep_rate"] == pytest.approx(30.0, abs=1.0)
    # human-readable variant mentions every component
    r = runner.invoke(main, ["replay", "--data-dir", str(tmp_path), meta["session_id"]])
    assert r.exit_code == 0
    for name in ("sd", "rep_rate", "velocity"):
        assert name in r.output


def test_record_discard_stores_nothing(runner, tmp_path):
    pid = _add_patient(runner, tmp_path)
    r = runner.invoke(
        main,
        [
            "record",
            "--data-dir",
            str(tmp_path),
            "--patient",
            pid,
            "--therapy",
            "WF",
            "--duration",
            "5",
            "--discard",
        ],
    )
    assert r.exit_code == 0
    assert "discarded" in r.output
    assert not (tmp_path / "sessions").exists() or not list((tmp_path / "sessions").iterdir())


def test_record_unknown_patient(runner, tmp_path):
    r = runner.invoke(
        main,
        [
            "record",
            "--data-dir",
            str(tmp_path),
            "--patient",
            "ghost",
            "--therapy",
            "WF",
            "--duration",
            "5",
        ],
    )
    assert r.exit_code == 1
    assert "ghost" in r.output


def test_replay_unknown_session(runner, tmp_path):
    r = runner.invoke(main, ["replay", "--data-dir", str(tmp_path), "missing"])
    assert r.exit_code == 1


def test_rpmv_and_score_flow(runner, tmp_path):
    ref = _add_patient(runner, tmp_path, name="Ref Subject", birth_year=1950)
    pat = _add_patient(runner, tmp_path, name="Scored Patient", birth_year=1980)
    for seed in ("0", "1"):
        _record(runner, tmp_path, ref, seed=seed)
    r = runner.invoke(
        main,
        ["rpmv", "build", "--data-dir", str(tmp_path), "--therapy", "WF", "--subjects", ref, "--json"],
    )
    assert r.exit_code == 0, r.output
    vec = json.loads(r.output)["rpmv"]
    assert len(vec) == 8

    r = runner.invoke(
        main, ["rpmv", "show", "--data-dir", str(tmp_path), "--therapy", "WF", "--json"]
    )
    assert r.exit_code == 0
    assert json.loads(r.output)["rpmv"] == pytest.approx(vec)

    for seed, amp in (("2", "25"), ("3", "32"), ("4", "40")):
        _record(runner, tmp_path, pat, amplitude=amp, seed=seed)
    r = runner.invoke(
        main, ["score", "--data-dir", str(tmp_path), "--patient", pat, "--json"]
    )
    assert r.exit_code == 0, r.output
    report = json.loads(r.output)
    assert report["therapies"][0]["n_considered"] == 3
    assert 0.0 <= report["total"] <= report["max_total"]

    # readable variant
    r = runner.invoke(main, ["score", "--data-dir", str(tmp_path), "--patient", pat])
    assert r.exit_code == 0
    assert "WF" in r.output and "total" in r.output


def test_rpmv_show_missing(runner, tmp_path):
    r = runner.invoke(
        main, ["rpmv", "show", "--data-dir", str(tmp_path), "--therapy", "WF"]
    )
    assert r.exit_code == 1


def test_score_unknown_patient(runner, tmp_path):
    r = runner.invoke(main, ["score", "--data-dir", str(tmp_path), "--patient", "ghost"])
    assert r.exit_code == 1


def test_stats_reproduce(runner):
    r = runner.invoke(main, ["stats", "reproduce"])
    assert r.exit_code == 0
    assert "system mean     6.18875" in r.output
    assert "therapist mean  6.37500" in r.output
    assert "pearson r = 0.988465" in r.output
    r = runner.invoke(main, ["stats", "reproduce", "--json"])
    doc = json.loads(r.output)
    assert doc["t_df"] == 15
    assert doc["f"] == pytest.approx(1.05442, abs=1e-4)
    assert doc["deviation_min"] == pytest.approx(-16.67, abs=0.01)
    assert doc["deviation_max"] == pytest.approx(10.0, abs=0.01)
