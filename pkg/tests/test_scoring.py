import numpy as np
import pytest

from rehabmetrics.scoring import (
    OUTCOME_NEGATIVE,
    OUTCOME_NEUTRAL,
    OUTCOME_POSITIVE,
    TIE_TOL,
    PatientScoreReport,
    build_rpmv,
    delta,
    l2_normalize,
    pairwise_outcomes,
    score_sessions,
)


def test_l2_normalize():
    v = l2_normalize(np.array([3.0, 4.0]))
    assert np.allclose(v, [0.6, 0.8])
    with pytest.raises(ValueError):
        l2_normalize(np.zeros(8))


def test_build_rpmv_median_then_normalize():
    by_subject = {
        "a": [np.array([2.0, 0.0]), np.array([4.0, 0.0])],  # mean (3, 0)
        "b": [np.array([5.0, 0.0])],
        "c": [np.array([1.0, 1.0])],
    }
    # subject means: (3,0), (5,0), (1,1); medians: (3, 0)
    rpmv = build_rpmv(by_subject)
    assert np.allclose(rpmv, [1.0, 0.0])
    assert np.linalg.norm(rpmv) == pytest.approx(1.0)


def test_build_rpmv_validation():
    with pytest.raises(ValueError):
        build_rpmv({})
    with pytest.raises(ValueError):
        build_rpmv({"a": []})
    with pytest.raises(ValueError):
        build_rpmv({"a": [np.ones(8)], "b": [np.ones(7)]})


def test_delta_bounds_and_scale_invariance():
    r = l2_normalize(np.ones(8))
    assert delta(np.ones(8), r) == pytest.approx(0.0, abs=1e-12)
    assert delta(17.0 * np.ones(8), r) == pytest.approx(0.0, abs=1e-12)
    opposite = -np.ones(8)
    assert delta(opposite, r) == pytest.approx(2.0, abs=1e-12)
    rng = np.random.default_rng(0)
    for _ in range(100):
        d = delta(rng.normal(size=8), l2_normalize(rng.normal(size=8)))
        assert 0.0 <= d <= 2.0


def test_pairwise_outcomes_matrix():
    out = pairwise_outcomes(np.array([0.5, 0.3, 0.3, 0.8]))
    # upper triangle and diagonal unused
    assert out[0, 0] == out[0, 1] == out[1, 3] == -1
    assert out[1, 0] == OUTCOME_POSITIVE  # 0.3 < 0.5, improved
    assert out[2, 1] == OUTCOME_NEUTRAL  # exact tie
    assert out[3, 0] == OUTCOME_NEGATIVE  # 0.8 > 0.5, regressed
    assert out[3, 2] == OUTCOME_NEGATIVE


def test_tie_tolerance():
    out = pairwise_outcomes(np.array([0.5, 0.5 + TIE_TOL / 2]))
    assert out[1, 0] == OUTCOME_NEUTRAL
    out = pairwise_outcomes(np.array([0.5, 0.5 + TIE_TOL * 3]))
    assert out[1, 0] == OUTCOME_NEGATIVE


def test_score_range_endpoints():
    best = score_sessions([0.9, 0.5, 0.1])
    assert best.score == 2.0 and best.n_positive == 3
    worst = score_sessions([0.1, 0.5, 0.9])
    assert worst.score == 0.0 and worst.n_negative == 3
    flat = score_sessions([0.4, 0.4, 0.4])
    assert flat.score == 1.0 and flat.n_neutral == 3


def test_score_pair_count():
    for s in range(2, 9):
        ts = score_sessions(np.linspace(1.0, 0.1, s))
        assert ts.n_considered == (s * s - s) // 2
        assert ts.n_positive + ts.n_neutral + ts.n_negative == ts.n_considered


def test_score_needs_two_sessions():
    with pytest.raises(ValueError):
        score_sessions([0.5])


def test_score_serialization():
    ts = score_sessions([0.5, 0.3], therapy_code="WF")
    d = ts.to_dict()
    assert d["therapy_code"] == "WF"
    assert d["score"] == 2.0
    report = PatientScoreReport(patient_id="p", therapy_scores=(ts,))
    rd = report.to_dict()
    assert rd["total"] == 2.0 and rd["max_total"] == 2.0
