"""Progress scoring: reference vectors, session distances, pairwise outcomes.

The reference for a therapy is built once from an unimpaired cohort: mean
metrics vector per subject over their sessions, component-wise median across
subjects, then L2 normalization. A patient session is scored by the Euclidean
distance delta between its normalized metrics vector and the reference
(0 = indistinguishable from reference, 2 = opposite); progress over a series
of sessions compares every later delta with every earlier one.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Score-difference magnitudes at or below this are ties (neutral outcome).
TIE_TOL = 1e-9

OUTCOME_NEGATIVE = 0
OUTCOME_NEUTRAL = 1
OUTCOME_POSITIVE = 2


def l2_normalize(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    n = float(np.linalg.norm(v))
    if n == 0.0:
        raise ValueError("cannot normalize a zero metrics vector")
    return v / n


def build_rpmv(pmvs_by_subject: dict[str, list[np.ndarray]]) -> np.ndarray:
    """Reference metrics vector from the reference cohort's sessions.

    Args:
        pmvs_by_subject: subject id -> that subject's session vectors.

    Raises:
        ValueError: empty cohort, a subject with no sessions, or
            inconsistent vector lengths.
    """
    if not pmvs_by_subject:
        raise ValueError("reference cohort is empty")
    subject_means = []
    width = None
    for subject, pmvs in pmvs_by_subject.items():
        if not pmvs:
            raise ValueError(f"subject {subject!r} has no sessions")
        arr = np.asarray(pmvs, dtype=float)
        if arr.ndim != 2:
            raise ValueError(f"subject {subject!r}: vectors have unequal lengths")
        if width is None:
            width = arr.shape[1]
        elif arr.shape[1] != width:
            raise ValueError("vector length differs across subjects")
        subject_means.append(arr.mean(axis=0))
    pooled = np.median(np.stack(subject_means), axis=0)
    return l2_normalize(pooled)


def delta(pmv: np.ndarray, rpmv: np.ndarray) -> float:
    """Distance of a session from the reference, in [0, 2].

    Both vectors live on the unit sphere, so the Euclidean distance is
    bounded by the diameter.
    """
    pmv = np.asarray(pmv, dtype=float)
    rpmv = np.asarray(rpmv, dtype=float)
    if pmv.shape != rpmv.shape:
        raise ValueError(f"shape mismatch: {pmv.shape} vs {rpmv.shape}")
    return float(np.linalg.norm(l2_normalize(pmv) - l2_normalize(rpmv)))


def pairwise_outcomes(deltas: np.ndarray) -> np.ndarray:
    """Outcome of every (later, earlier) session pair.

    Entry (i, j) for i > j classifies delta_i - delta_j: a drop in distance
    is improvement (positive), a rise is regression (negative), magnitudes
    within TIE_TOL are neutral. Only the strict lower triangle is
    meaningful; the rest of the returned matrix is -1.
    """
    d = np.asarray(deltas, dtype=float)
    n = len(d)
    out = np.full((n, n), -1, dtype=int)
    diff = d[:, None] - d[None, :]
    lower = np.tril(np.ones((n, n), dtype=bool), k=-1)
    out[lower & (diff < -TIE_TOL)] = OUTCOME_POSITIVE
    out[lower & (np.abs(diff) <= TIE_TOL)] = OUTCOME_NEUTRAL
    out[lower & (diff > TIE_TOL)] = OUTCOME_NEGATIVE
    return out


@dataclass(frozen=True)
class TherapyScore:
    therapy_code: str
    deltas: tuple[float, ...]
    n_positive: int
    n_neutral: int
    n_negative: int
    n_considered: int
    score: float

    def to_dict(self) -> dict:
        return {
            "therapy_code": self.therapy_code,
            "deltas": list(self.deltas),
            "n_positive": self.n_positive,
            "n_neutral": self.n_neutral,
            "n_negative": self.n_negative,
            "n_considered": self.n_considered,
            "score": self.score,
        }


def score_sessions(deltas, therapy_code: str = "") -> TherapyScore:
    """Progress score over a chronological series of session distances.

    score = (n_neutral + 2 * n_positive) / N with N = (S^2 - S) / 2 pairs,
    so the range is [0, 2]: 0 if every later session is farther from the
    reference than every earlier one, 2 if every one is closer.

    Raises:
        ValueError: fewer than two sessions (no pairs to compare).
    """
    d = np.asarray(deltas, dtype=float)
    s = len(d)
    if s < 2:
        raise ValueError("scoring needs at least two sessions")
    outcomes = pairwise_outcomes(d)
    lower = np.tril(np.ones((s, s), dtype=bool), k=-1)
    vals = outcomes[lower]
    n_pos = int(np.sum(vals == OUTCOME_POSITIVE))
    n_neu = int(np.sum(vals == OUTCOME_NEUTRAL))
    n_neg = int(np.sum(vals == OUTCOME_NEGATIVE))
    n = (s * s - s) // 2
    return TherapyScore(
        therapy_code=therapy_code,
        deltas=tuple(float(x) for x in d),
        n_positive=n_pos,
        n_neutral=n_neu,
        n_negative=n_neg,
        n_considered=n,
        score=(n_neu + 2 * n_pos) / n,
    )


@dataclass(frozen=True)
class PatientScoreReport:
    """All administered therapies for one patient, plus the ceiling."""

    patient_id: str
    therapy_scores: tuple[TherapyScore, ...] = field(default_factory=tuple)

    @property
    def total(self) -> float:
        return float(sum(t.score for t in self.therapy_scores))

    @property
    def max_total(self) -> float:
        return 2.0 * len(self.therapy_scores)

    def to_dict(self) -> dict:
        return {
            "patient_id": self.patient_id,
            "therapies": [t.to_dict() for t in self.therapy_scores],
            "total": self.total,
            "max_total": self.max_total,
        }
