// Browser entry point: wires the view model, API client, and live channel
// to a plain-DOM console. No framework; the page is an SVG skeleton view,
// a control strip whose buttons track action availability, a metrics strip,
// and a history/score drawer.

import { ApiClient } from "./api.js";
import { validateTimerMinutes } from "./actions.js";
import { consumeNdjson } from "./live.js";
import type { SessionSnapshot, TherapyInfo } from "./model.js";
import { projectPose, toSvgPath, type Viewport } from "./projection.js";
import { ConsoleViewModel } from "./viewmodel.js";

const vm = new ConsoleViewModel();
const api = new ApiClient(window.location.origin);

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

const viewport: Viewport = { width: 360, height: 420, scale: 360, plane: "front" };

function renderSkeleton(): void {
  const path = el<HTMLElement>("skeleton-path");
  if (vm.pose === null) {
    path.setAttribute("d", "");
    return;
  }
  path.setAttribute("d", toSvgPath(projectPose(vm.pose, viewport)));
}

function renderControls(): void {
  const actions = vm.actions();
  for (const [name, enabled] of Object.entries(actions)) {
    const button = document.getElementById(`btn-${name}`);
    if (button instanceof HTMLButtonElement) {
      button.disabled = !enabled;
    }
  }
  el("state-label").textContent = vm.state;
}

function renderMetrics(): void {
  const m = vm.metrics();
  el("rep-count").textContent = String(m.repCount);
  el("timer").textContent = `${m.elapsedS.toFixed(1)} s / ${m.remainingS.toFixed(1)} s left`;
  el("theta").textContent = m.thetaDeg === null ? "–" : `${m.thetaDeg.toFixed(1)}°`;
  el("rom").textContent =
    m.observedRomDeg === null
      ? "–"
      : `${m.observedRomDeg.toFixed(1)}° of ${m.approvedRomDeg ?? "?"}° approved`;
  el("session-error").textContent = vm.error ?? "";
}

function renderAll(): void {
  renderSkeleton();
  renderControls();
  renderMetrics();
}

let sessionId: string | null = null;
let liveAbort: AbortController | null = null;

async function followLive(id: string): Promise<void> {
  liveAbort?.abort();
  liveAbort = new AbortController();
  const body = await api.openLive(id, liveAbort.signal);
  await consumeNdjson<SessionSnapshot>(body, (snap) => {
    if (vm.applySnapshot(snap)) {
      renderAll();
    }
  });
}

async function startSession(): Promise<void> {
  const therapy = vm.therapy;
  if (therapy === null || vm.patient === null) {
    alert("pick a therapy and a patient first");
    return;
  }
  const minutes = Number(el<HTMLInputElement>("timer-minutes").value);
  const problem = validateTimerMinutes(minutes);
  if (problem !== null) {
    alert(problem);
    return;
  }
  const snap = await api.createSession({
    therapy_code: therapy.code,
    duration_s: minutes * 60,
    mode: vm.mode,
    patient_id: vm.patient.patient_id,
  });
  sessionId = snap.session_id;
  vm.applySnapshot(snap);
  renderAll();
  void followLive(snap.session_id).catch((e) => {
    vm.error = String(e);
    renderAll();
  });
}

function bindControls(): void {
  el<HTMLButtonElement>("btn-connect").onclick = () => void startSession();
  for (const event of ["start", "stop", "save", "discard", "abort"] as const) {
    el<HTMLButtonElement>(`btn-${event}`).onclick = () => {
      if (sessionId !== null) {
        void api
          .sendEvent(sessionId, event)
          .then((snap) => {
            vm.applySnapshot(snap);
            renderAll();
          })
          .catch((e) => alert(String(e))); // rejected events never block the UI
      }
    };
  }
  el<HTMLSelectElement>("plane-select").onchange = (ev) => {
    viewport.plane = (ev.target as HTMLSelectElement).value as Viewport["plane"];
    renderAll();
  };
}

async function loadCatalog(): Promise<void> {
  const therapies = await api.therapies();
  const select = el<HTMLSelectElement>("therapy-select");
  select.innerHTML = "";
  for (const t of therapies) {
    const option = document.createElement("option");
    option.value = t.code;
    option.textContent = `${t.code} — ${t.name}`;
    select.appendChild(option);
  }
  const pick = (code: string) => {
    const t = therapies.find((x: TherapyInfo) => x.code === code);
    if (t !== undefined) {
      vm.selectTherapy(t);
      el("illustration").setAttribute("data-ref", vm.illustration() ?? "");
    }
  };
  select.onchange = () => pick(select.value);
  if (therapies.length > 0) {
    pick(therapies[0]!.code);
  }
}

async function main(): Promise<void> {
  bindControls();
  await loadCatalog();
  renderAll();
}

if (typeof document !== "undefined") {
  void main();
}
