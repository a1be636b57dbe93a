// The console's view state: a mirror of what the service reports.
//
// Everything shown on screen comes from service responses and live-channel
// snapshots. The only bookkeeping done here is display bookkeeping over the
// received values themselves (extremes seen so far, countdown arithmetic);
// no metric is ever recomputed client-side.

import { availableActions, type PanelActions } from "./actions.js";
import type {
  JointPose,
  PatientRecord,
  ScoreReport,
  SessionMode,
  SessionSnapshot,
  SessionState,
  TherapyInfo,
} from "./model.js";

export interface AngleExtremes {
  min_deg: number;
  max_deg: number;
}

export interface MetricsView {
  repCount: number;
  elapsedS: number;
  remainingS: number;
  thetaDeg: number | null;
  /** least and greatest angle seen in this session's live feed */
  excursion: AngleExtremes | null;
  /** observed swing (max - min) next to the medically approved value */
  observedRomDeg: number | null;
  approvedRomDeg: number | null;
}

export interface ChartBounds {
  minDeg: number;
  maxDeg: number;
  approvedBand: { lower: number; upper: number };
}

export class ConsoleViewModel {
  state: SessionState = "idle";
  mode: SessionMode = "active";
  pose: JointPose | null = null;
  repCount = 0;
  elapsedS = 0;
  durationS = 0;
  thetaDeg: number | null = null;
  error: string | null = null;
  therapy: TherapyInfo | null = null;
  patient: PatientRecord | null = null;
  scoreReport: ScoreReport | null = null;

  private lastTms: number | null = null;
  private minTheta: number | null = null;
  private maxTheta: number | null = null;
  private dropped = 0;

  selectTherapy(t: TherapyInfo): void {
    this.therapy = t;
  }

  selectPatient(p: PatientRecord): void {
    this.patient = p;
  }

  showScores(r: ScoreReport): void {
    this.scoreReport = r;
  }

  /**
   * Fold one snapshot into the view. Returns false (and changes nothing)
   * for a stale frame: one carrying an older sample time than the last
   * frame applied. Frames without samples yet always apply.
   */
  applySnapshot(snap: SessionSnapshot): boolean {
    if (
      snap.t_ms !== null &&
      this.lastTms !== null &&
      snap.t_ms < this.lastTms
    ) {
      this.dropped += 1;
      return false;
    }
    this.state = snap.state;
    this.mode = snap.mode;
    this.pose = snap.pose;
    this.repCount = snap.rep_count;
    this.elapsedS = snap.elapsed_s;
    this.durationS = snap.duration_s;
    this.thetaDeg = snap.theta_deg;
    this.error = snap.error;
    if (snap.t_ms !== null) {
      this.lastTms = snap.t_ms;
    }
    if (snap.theta_deg !== null) {
      this.minTheta =
        this.minTheta === null ? snap.theta_deg : Math.min(this.minTheta, snap.theta_deg);
      this.maxTheta =
        this.maxTheta === null ? snap.theta_deg : Math.max(this.maxTheta, snap.theta_deg);
    }
    return true;
  }

  get droppedFrames(): number {
    return this.dropped;
  }

  actions(): PanelActions {
    return availableActions(this.state, this.mode);
  }

  metrics(): MetricsView {
    const excursion =
      this.minTheta === null || this.maxTheta === null
        ? null
        : { min_deg: this.minTheta, max_deg: this.maxTheta };
    return {
      repCount: this.repCount,
      elapsedS: this.elapsedS,
      remainingS: Math.max(0, this.durationS - this.elapsedS),
      thetaDeg: this.thetaDeg,
      excursion,
      observedRomDeg:
        excursion === null ? null : excursion.max_deg - excursion.min_deg,
      approvedRomDeg: this.therapy === null ? null : this.therapy.rom_min_deg,
    };
  }

  /** Illustration of the therapy's base posture, from the catalog. */
  illustration(): string | null {
    return this.therapy === null ? null : this.therapy.base_posture;
  }

  /** Chart axes always contain the approved RoM band for the therapy. */
  chartBounds(): ChartBounds | null {
    if (this.therapy === null) {
      return null;
    }
    const upper = this.therapy.rom_max_deg;
    return {
      minDeg: -1.2 * upper,
      maxDeg: 1.2 * upper,
      approvedBand: { lower: this.therapy.rom_min_deg, upper },
    };
  }

  /** Start over for a fresh session (keeps patient and therapy context). */
  resetSession(): void {
    this.state = "idle";
    this.pose = null;
    this.repCount = 0;
    this.elapsedS = 0;
    this.durationS = 0;
    this.thetaDeg = null;
    this.error = null;
    this.lastTms = null;
    this.minTheta = null;
    this.maxTheta = null;
    this.dropped = 0;
  }
}
