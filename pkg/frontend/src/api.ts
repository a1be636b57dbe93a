// Typed client for the session service HTTP API and its live channel.
//
// The fetch implementation is injectable so unit tests can stub transport;
// the default is the ambient global fetch (browser or node 18+).

import type {
  PatientRecord,
  ScoreReport,
  SessionMeta,
  SessionSnapshot,
  TherapyInfo,
} from "./model.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    detail: string
  ) {
    super(`${status}: ${detail}`);
  }
}

export interface NewPatient {
  full_name: string;
  birth_year: number;
  age_years: number;
  sex: string;
  uld_duration_months: number;
  affected_limb: string;
}

export interface NewSession {
  therapy_code: string;
  duration_s: number;
  mode?: string;
  patient_id?: string;
  amplitude_deg?: number;
  frequency_hz?: number;
  noise_sigma_deg?: number;
  seed?: number;
}

export type SessionEvent = "start" | "stop" | "save" | "discard" | "abort";

type Fetch = typeof fetch;

export class ApiClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchImpl: Fetch = fetch
  ) {}

  private async request<T>(
    method: string,
    path: string,
    body?: unknown
  ): Promise<T> {
    const res = await this.fetchImpl(this.baseUrl + path, {
      method,
      headers: body === undefined ? {} : { "content-type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!res.ok) {
      let detail = res.statusText;
      try {
        detail = ((await res.json()) as { detail?: string }).detail ?? detail;
      } catch {
        // keep the HTTP status text
      }
      throw new ApiError(res.status, detail);
    }
    if (res.status === 204) {
      return undefined as T;
    }
    return (await res.json()) as T;
  }

  health(): Promise<{ status: string }> {
    return this.request("GET", "/health");
  }

  therapies(): Promise<TherapyInfo[]> {
    return this.request("GET", "/therapies");
  }

  registerPatient(p: NewPatient): Promise<PatientRecord> {
    return this.request("POST", "/patients", p);
  }

  listPatients(): Promise<PatientRecord[]> {
    return this.request("GET", "/patients");
  }

  patientHistory(patientId: string, therapy?: string): Promise<SessionMeta[]> {
    const q = therapy ? `?therapy=${encodeURIComponent(therapy)}` : "";
    return this.request("GET", `/patients/${patientId}/history${q}`);
  }

  createSession(s: NewSession): Promise<SessionSnapshot> {
    return this.request("POST", "/sessions", s);
  }

  sessionStatus(sessionId: string): Promise<SessionSnapshot> {
    return this.request("GET", `/sessions/${sessionId}`);
  }

  sendEvent(sessionId: string, event: SessionEvent): Promise<SessionSnapshot> {
    return this.request("POST", `/sessions/${sessionId}/events`, { event });
  }

  deleteRecord(sessionId: string): Promise<void> {
    return this.request("DELETE", `/records/${sessionId}`);
  }

  rpmv(therapyCode: string): Promise<{ therapy_code: string; rpmv: number[] }> {
    return this.request("GET", `/rpmv/${therapyCode}`);
  }

  generateScores(patientId: string, therapyCode?: string): Promise<ScoreReport> {
    return this.request("POST", "/scores", {
      patient_id: patientId,
      therapy_code: therapyCode ?? null,
    });
  }

  scores(patientId: string): Promise<ScoreReport> {
    return this.request("GET", `/scores/${patientId}`);
  }

  /** Open the live NDJSON channel; the returned body streams snapshots. */
  async openLive(
    sessionId: string,
    signal?: AbortSignal
  ): Promise<ReadableStream<Uint8Array>> {
    const res = await this.fetchImpl(
      `${this.baseUrl}/sessions/${sessionId}/live`,
      { signal }
    );
    if (!res.ok || res.body === null) {
      throw new ApiError(res.status, "live channel unavailable");
    }
    return res.body;
  }
}
