/**
 * Client-side view state and the mode rules it must enforce on its own,
 * regardless of what the server sends: a blank canvas in the auditory
 * mode, and no audio playback in the visual mode.
 */

import type { Mode, ServerMsg, TrialDoneMsg } from "./protocol.js";

export interface ViewState {
  mode: Mode;
  connected: boolean;
  probe: [number, number, number];
  target: [number, number, number] | null;
  targetVisible: boolean;
  trialIndex: number;
  sessionActive: boolean;
  lastTrial: TrialDoneMsg | null;
  sessionFile: string | null;
  lastError: string | null;
  bufferDepth: number;
  concealedBlocks: number;
}

export function initialState(): ViewState {
  return {
    mode: "av",
    connected: false,
    probe: [0, 9.5, 0],
    target: null,
    targetVisible: false,
    trialIndex: 0,
    sessionActive: false,
    lastTrial: null,
    sessionFile: null,
    lastError: null,
    bufferDepth: 0,
    concealedBlocks: 0,
  };
}

export function canvasBlank(state: ViewState): boolean {
  return state.mode === "a"; // the screen is black under pure auditory guidance
}

export function audioEnabled(state: ViewState): boolean {
  return state.mode !== "v"; // the sonification is muted under pure visual guidance
}

export function applyServerMsg(state: ViewState, msg: ServerMsg): ViewState {
  switch (msg.type) {
    case "target":
      return { ...state, target: [msg.x, msg.y, msg.z], targetVisible: msg.visible };
    case "trial_done": {
      const next = { ...state, lastTrial: msg, trialIndex: msg.trial };
      return msg.trial >= 30 ? { ...next, sessionActive: false } : next;
    }
    case "session_done":
      return { ...state, sessionActive: false, sessionFile: msg.file };
    case "error":
      return { ...state, lastError: msg.detail };
    case "params":
      return state; // displayed transiently, not part of durable state
  }
}

export function applyLocalMode(state: ViewState, mode: Mode): ViewState {
  // leaving the visible modes also forgets the target position: a blank
  // canvas must not retain guidance the mode forbids
  const hideTarget = mode === "a";
  return {
    ...state,
    mode,
    targetVisible: hideTarget ? false : state.targetVisible,
    target: hideTarget ? null : state.target,
  };
}

export function startSession(state: ViewState, firstMode: Mode): ViewState {
  return {
    ...applyLocalMode(state, firstMode),
    sessionActive: true,
    trialIndex: 0,
    lastTrial: null,
    sessionFile: null,
  };
}

export function decadeMode(order: string, trialIndex: number): Mode {
  const modes = order.split("-") as Mode[];
  return modes[Math.min(Math.floor(trialIndex / 10), 2)];
}
