// Shapes of everything the service sends. The console renders these as-is:
// all analytics happen server-side, the client never recomputes a metric.

export type SessionState =
  | "idle"
  | "connecting"
  | "calibrating"
  | "countdown"
  | "running"
  | "stopped"
  | "saved"
  | "discarded";

export const ALL_STATES: readonly SessionState[] = [
  "idle",
  "connecting",
  "calibrating",
  "countdown",
  "running",
  "stopped",
  "saved",
  "discarded",
];

export type SessionMode = "active" | "passive";

export interface TherapyInfo {
  code: string;
  name: string;
  rom_min_deg: number;
  rom_max_deg: number;
  placement: string;
  angle: { device: number; component: string; frame: string };
  base_posture: string;
}

export interface PatientRecord {
  patient_id: string;
  full_name: string;
  birth_year: number;
  age_years: number;
  sex: string;
  uld_duration_months: number;
  affected_limb: string;
}

export type Vec3 = [number, number, number];

/** Joint centers in meters, shoulder at the origin. */
export interface JointPose {
  shoulder: Vec3;
  elbow: Vec3;
  wrist: Vec3;
  hand_tip: Vec3;
}

/** One line of the live NDJSON channel (also the session-status payload). */
export interface SessionSnapshot {
  session_id: string;
  state: SessionState;
  therapy_code: string;
  mode: SessionMode;
  patient_id: string | null;
  duration_s: number;
  elapsed_s: number;
  rep_count: number;
  t_ms: number | null;
  theta_deg: number | null;
  error: string | null;
  pose: JointPose | null;
}

export interface SessionMeta {
  session_id: string;
  patient_id: string | null;
  therapy_code: string;
  mode: SessionMode;
  duration_s: number;
  sample_rate_hz: number;
  started_at: string;
  n_rows: number;
  rep_count: number;
}

export interface TherapyScore {
  therapy_code: string;
  deltas: number[];
  n_positive: number;
  n_neutral: number;
  n_negative: number;
  n_considered: number;
  score: number;
}

export interface ScoreReport {
  patient_id: string;
  therapies: TherapyScore[];
  total: number;
  max_total: number;
}
