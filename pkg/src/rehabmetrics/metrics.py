"""Movement metrics extracted from one session's therapy-angle trace.

The per-session summary is an 8-component vector in a fixed order (the
scoring pipeline depends on the order, never reorder):

    0  sd         standard deviation of the angle, deg
    1  mean       mean angle, deg
    2  rep_rate   detected cycles per minute
    3  med80      median of peak angles >= 80% of the reference peak, deg
    4  rms        root mean square angle, deg
    5  period     mean spacing of successive peaks, s
    6  velocity   mean absolute angular velocity, deg/s
    7  amplitude  mean half peak-to-trough excursion, deg

Cycle metrics of a trace with no detectable cycles are zero rather than NaN
so downstream aggregation stays total.
"""

from __future__ import annotations

import numpy as np
from scipy.signal import find_peaks, savgol_filter

PMV_COMPONENTS = (
    "sd",
    "mean",
    "rep_rate",
    "med80",
    "rms",
    "period",
    "velocity",
    "amplitude",
)

# Extrema gating: slow tremor and sensor ripple must not count as reps.
DEFAULT_PROMINENCE_DEG = 8.0
DEFAULT_MIN_PERIOD_S = 0.4

# Savitzky-Golay derivative for the velocity estimate; raw sample-to-sample
# differences amplify measurement noise by the sample rate. The same local
# cubic fit supplies the trace that extrema are detected on and read from:
# the maximum of raw noisy samples around a crest over-reads the true peak,
# while the fitted value stays unbiased.
_SAVGOL_WINDOW = 21
_SAVGOL_ORDER = 3


def _fitted(theta: np.ndarray) -> np.ndarray:
    """Locally fitted copy of the trace (identity when it is too short)."""
    if len(theta) >= _SAVGOL_WINDOW:
        return savgol_filter(theta, _SAVGOL_WINDOW, _SAVGOL_ORDER)
    return theta


def detect_extrema(
    theta: np.ndarray,
    t: np.ndarray,
    prominence: float = DEFAULT_PROMINENCE_DEG,
    min_period_s: float = DEFAULT_MIN_PERIOD_S,
) -> tuple[np.ndarray, np.ndarray]:
    """Prominence-gated peaks and troughs, alternation enforced.

    Adjacent same-kind extrema keep the extremer one, so the output is a
    strictly alternating peak/trough sequence.

    Returns:
        (peak indices, trough indices), both int arrays.
    """
    theta = np.asarray(theta, dtype=float)
    t = np.asarray(t, dtype=float)
    if len(theta) != len(t):
        raise ValueError("theta and t must have equal length")
    if len(theta) < 3:
        return np.array([], dtype=int), np.array([], dtype=int)
    dt = float(np.median(np.diff(t)))
    distance = max(1, int(round(min_period_s / dt))) if dt > 0 else 1
    peaks, _ = find_peaks(theta, prominence=prominence, distance=distance)
    troughs, _ = find_peaks(-theta, prominence=prominence, distance=distance)

    events = sorted(
        [(int(i), True) for i in peaks] + [(int(i), False) for i in troughs]
    )
    kept: list[tuple[int, bool]] = []
    for idx, is_peak in events:
        if kept and kept[-1][1] == is_peak:
            prev, _ = kept[-1]
            better = theta[idx] > theta[prev] if is_peak else theta[idx] < theta[prev]
            if better:
                kept[-1] = (idx, is_peak)
        else:
            kept.append((idx, is_peak))
    p = np.array([i for i, k in kept if k], dtype=int)
    q = np.array([i for i, k in kept if not k], dtype=int)
    return p, q


def angular_velocity(theta: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Smoothed derivative in deg/s; falls back to finite differences for
    traces shorter than the smoothing window."""
    theta = np.asarray(theta, dtype=float)
    t = np.asarray(t, dtype=float)
    if len(theta) < 2:
        return np.zeros(len(theta))
    dt = float(np.median(np.diff(t)))
    if len(theta) >= _SAVGOL_WINDOW and dt > 0:
        return savgol_filter(theta, _SAVGOL_WINDOW, _SAVGOL_ORDER, deriv=1, delta=dt)
    v = np.gradient(theta, t)
    return v


def compute_pmv(
    theta: np.ndarray,
    t: np.ndarray,
    med80_reference: float | None = None,
    prominence: float = DEFAULT_PROMINENCE_DEG,
    min_period_s: float = DEFAULT_MIN_PERIOD_S,
) -> np.ndarray:
    """Assemble the 8-component metrics vector for one trace.

    Args:
        theta: therapy angle per sample, degrees.
        t: sample times, seconds, strictly increasing.
        med80_reference: reference peak for the med80 gate. Default is the
            session's own maximum peak; pass the therapy's approved RoM to
            gate against the clinical target instead.
    """
    theta = np.asarray(theta, dtype=float)
    t = np.asarray(t, dtype=float)
    if len(theta) < 2:
        raise ValueError("need at least two samples")
    duration = float(t[-1] - t[0])
    if duration <= 0:
        raise ValueError("time must be strictly increasing")

    fitted = _fitted(theta)
    peaks, troughs = detect_extrema(fitted, t, prominence, min_period_s)

    sd = float(np.std(theta))
    mean = float(np.mean(theta))
    rms = float(np.sqrt(np.mean(theta**2)))
    velocity = float(np.mean(np.abs(angular_velocity(theta, t))))

    if len(peaks) == 0:
        rep_rate = med80 = period = amplitude = 0.0
    else:
        rep_rate = len(peaks) / duration * 60.0
        peak_vals = fitted[peaks]
        ref = float(np.max(peak_vals)) if med80_reference is None else med80_reference
        gated = peak_vals[peak_vals >= 0.8 * ref]
        med80 = float(np.median(gated)) if len(gated) else 0.0
        period = float(np.mean(np.diff(t[peaks]))) if len(peaks) >= 2 else 0.0
        if len(troughs):
            amps = []
            for p in peaks:
                later = troughs[troughs > p]
                q = later[0] if len(later) else troughs[troughs < p][-1]
                amps.append((fitted[p] - fitted[q]) / 2.0)
            amplitude = float(np.mean(amps))
        else:
            amplitude = 0.0

    return np.array([sd, mean, rep_rate, med80, rms, period, velocity, amplitude])


class LiveRepCounter:
    """Incremental repetition counter for the live display.

    Hysteresis on the signed therapy angle: a rep is counted when the angle
    has risen through hi_frac of the approved RoM and then fallen back
    through lo_frac. The count never decreases, so extending a stream by
    more samples can only add reps (the live number and a batch recount
    agree on clean periodic motion). Flip the sign of the input for
    exercises whose excursion is negative-going.
    """

    def __init__(self, rom_deg: float, hi_frac: float = 0.4, lo_frac: float = 0.1):
        if not 0 <= lo_frac < hi_frac:
            raise ValueError("need 0 <= lo_frac < hi_frac")
        self.hi = hi_frac * rom_deg
        self.lo = lo_frac * rom_deg
        self.count = 0
        self._armed = False

    def update(self, theta_deg: float) -> int:
        if not self._armed and theta_deg >= self.hi:
            self._armed = True
        elif self._armed and theta_deg <= self.lo:
            self._armed = False
            self.count += 1
        return self.count

    def feed(self, theta_deg) -> int:
        for v in np.asarray(theta_deg, dtype=float).ravel():
            self.update(float(v))
        return self.count
