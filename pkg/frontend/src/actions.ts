// Which console controls are live in which session state.
//
// Availability is a pure function of the mirrored (state, mode) pair so it
// can be frozen in snapshot tests against the service's own state machine.
// The panel intents cover the session buttons plus the pre-session
// configuration controls (mode, instrumented-arm and timer selectors).

import type { SessionMode, SessionState } from "./model.js";

export interface PanelActions {
  connect: boolean;
  start: boolean;
  stop: boolean;
  save: boolean;
  discard: boolean;
  modeToggle: boolean;
  armToggle: boolean;
  timerSet: boolean;
}

const NOTHING: PanelActions = {
  connect: false,
  start: false,
  stop: false,
  save: false,
  discard: false,
  modeToggle: false,
  armToggle: false,
  timerSet: false,
};

export function availableActions(
  state: SessionState,
  mode: SessionMode
): PanelActions {
  switch (state) {
    case "idle":
      // everything is configurable before a device is connected
      return {
        ...NOTHING,
        connect: true,
        modeToggle: true,
        armToggle: true,
        timerSet: true,
      };
    case "connecting":
      return { ...NOTHING }; // waiting for the calibration hold
    case "calibrating":
      return { ...NOTHING, start: true };
    case "countdown":
      return { ...NOTHING }; // countdown runs to completion
    case "running":
      return { ...NOTHING, stop: true };
    case "stopped":
      // a passive demonstration is never persisted, so no save offer
      return { ...NOTHING, save: mode === "active", discard: true };
    case "saved":
    case "discarded":
      return { ...NOTHING }; // terminal; a new session starts from idle
  }
}

export const TIMER_MAX_MINUTES = 30;

/** Client-side gate for the session timer ("between 0 and 30 minutes"). */
export function validateTimerMinutes(minutes: number): string | null {
  if (!Number.isFinite(minutes)) {
    return "timer must be a number of minutes";
  }
  if (minutes <= 0 || minutes > TIMER_MAX_MINUTES) {
    return `timer must be above 0 and at most ${TIMER_MAX_MINUTES} minutes`;
  }
  return null;
}
