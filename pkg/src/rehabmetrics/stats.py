"""Pilot-study statistics: the published comparison of system and therapist scores.

The two score tables (16 patients, per-therapy scores out of 2, '-' for
not administered) ship as CSV fixtures. The analysis compares per-patient
totals: paired two-tailed t-test, variance-ratio F-test, Pearson correlation,
and per-patient percent deviation relative to the achievable maximum.

p-values use the regularized incomplete beta function implemented here on
math.lgamma with the standard continued fraction, so the statistics pipeline
carries no dependency beyond the stdlib.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from importlib import resources
from math import exp, lgamma, log, sqrt

import numpy as np

PATIENT_COLUMNS = tuple(f"p{i}" for i in range(1, 17))


@dataclass(frozen=True)
class ScoreTable:
    """One published score table: cells[therapy][patient] is None if the
    therapy was not administered to that patient."""

    cells: dict[str, dict[str, float | None]]
    totals: dict[str, float]
    max_totals: dict[str, float]

    def administered(self, patient: str) -> list[str]:
        return [t for t, row in self.cells.items() if row[patient] is not None]


def _parse_cell(text: str) -> float | None:
    text = text.strip()
    return None if text == "-" else float(text)


def load_score_table(name: str) -> ScoreTable:
    """Read a packaged score-table fixture by file name."""
    raw = resources.files("rehabmetrics.data").joinpath(name).read_text()
    rows = list(csv.reader(raw.strip().splitlines()))
    header = rows[0]
    assert header[0] == "Therapy" and tuple(header[1:]) == PATIENT_COLUMNS
    cells: dict[str, dict[str, float | None]] = {}
    totals: dict[str, float] = {}
    max_totals: dict[str, float] = {}
    for row in rows[1:]:
        label, values = row[0], row[1:]
        if label == "Score":
            totals = {p: float(v) for p, v in zip(PATIENT_COLUMNS, values)}
        elif label == "Max Score":
            max_totals = {p: float(v) for p, v in zip(PATIENT_COLUMNS, values)}
        else:
            cells[label] = {
                p: _parse_cell(v) for p, v in zip(PATIENT_COLUMNS, values)
            }
    return ScoreTable(cells=cells, totals=totals, max_totals=max_totals)


def system_score_table() -> ScoreTable:
    return load_score_table("table_system_scores.csv")


def therapist_score_table() -> ScoreTable:
    return load_score_table("table_pt_scores.csv")


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta (modified Lentz)."""
    MAXIT, EPS, FPMIN = 200, 3e-16, 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < FPMIN:
        d = FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, MAXIT + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < FPMIN:
            d = FPMIN
        c = 1.0 + aa / c
        if abs(c) < FPMIN:
            c = FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < FPMIN:
            d = FPMIN
        c = 1.0 + aa / c
        if abs(c) < FPMIN:
            c = FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < EPS:
            break
    return h


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b)."""
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    bt = exp(lgamma(a + b) - lgamma(a) - lgamma(b) + a * log(x) + b * log(1.0 - x))
    if x < (a + 1.0) / (a + b + 2.0):
        return bt * _betacf(a, b, x) / a
    return 1.0 - bt * _betacf(b, a, 1.0 - x) / b


@dataclass(frozen=True)
class PairedT:
    t: float
    df: int
    p_two_tailed: float


def paired_t_test(a, b) -> PairedT:
    """Two-tailed paired t-test on matched samples."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1 or len(a) < 2:
        raise ValueError("need two equal-length 1-d samples, n >= 2")
    d = a - b
    n = len(d)
    sd = float(np.std(d, ddof=1))
    if sd == 0.0:
        raise ValueError("zero variance of differences")
    t = float(np.mean(d)) / (sd / sqrt(n))
    df = n - 1
    p = betainc(df / 2.0, 0.5, df / (df + t * t))
    return PairedT(t=t, df=df, p_two_tailed=p)


@dataclass(frozen=True)
class VarianceRatio:
    f: float
    df1: int
    df2: int
    p_one_tailed: float


def variance_ratio_test(a, b) -> VarianceRatio:
    """F = var(a) / var(b) with sample variances; one-tailed P(F' > F)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    va = float(np.var(a, ddof=1))
    vb = float(np.var(b, ddof=1))
    if vb == 0.0:
        raise ValueError("zero variance in denominator sample")
    f = va / vb
    df1, df2 = len(a) - 1, len(b) - 1
    p = betainc(df2 / 2.0, df1 / 2.0, df2 / (df2 + df1 * f))
    return VarianceRatio(f=f, df1=df1, df2=df2, p_one_tailed=p)


def pearson_r(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    am, bm = a - a.mean(), b - b.mean()
    denom = sqrt(float(np.sum(am**2)) * float(np.sum(bm**2)))
    if denom == 0.0:
        raise ValueError("zero variance sample")
    return float(np.sum(am * bm)) / denom


def percent_deviation(system_total: float, pt_total: float, max_total: float) -> float:
    """Signed deviation of the system score from the therapist score, as a
    percentage of that patient's achievable maximum."""
    if max_total <= 0:
        raise ValueError("max_total must be positive")
    return 100.0 * (system_total - pt_total) / max_total


@dataclass(frozen=True)
class StudySummary:
    system_mean: float
    pt_mean: float
    t: float
    t_df: int
    t_p: float
    f: float
    f_p: float
    r: float
    r_squared: float
    deviations_pct: tuple[float, ...]

    @property
    def deviation_min(self) -> float:
        return min(self.deviations_pct)

    @property
    def deviation_max(self) -> float:
        return max(self.deviations_pct)

    def to_dict(self) -> dict:
        return {
            "system_mean": self.system_mean,
            "pt_mean": self.pt_mean,
            "t": self.t,
            "t_df": self.t_df,
            "t_p": self.t_p,
            "f": self.f,
            "f_p": self.f_p,
            "r": self.r,
            "r_squared": self.r_squared,
            "deviations_pct": list(self.deviations_pct),
            "deviation_min": self.deviation_min,
            "deviation_max": self.deviation_max,
        }


def reproduce_study() -> StudySummary:
    """Run the full published comparison off the packaged fixtures."""
    sys_table = system_score_table()
    pt_table = therapist_score_table()
    sys_totals = np.array([sys_table.totals[p] for p in PATIENT_COLUMNS])
    pt_totals = np.array([pt_table.totals[p] for p in PATIENT_COLUMNS])
    max_totals = np.array([sys_table.max_totals[p] for p in PATIENT_COLUMNS])

    tt = paired_t_test(sys_totals, pt_totals)
    ft = variance_ratio_test(sys_totals, pt_totals)
    r = pearson_r(sys_totals, pt_totals)
    devs = tuple(
        percent_deviation(s, p, m)
        for s, p, m in zip(sys_totals, pt_totals, max_totals)
    )
    return StudySummary(
        system_mean=float(sys_totals.mean()),
        pt_mean=float(pt_totals.mean()),
        t=tt.t,
        t_df=tt.df,
        t_p=tt.p_two_tailed,
        f=ft.f,
        f_p=ft.p_one_tailed,
        r=r,
        r_squared=r * r,
        deviations_pct=devs,
    )
