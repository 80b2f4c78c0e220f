import { describe, expect, it } from "vitest";

import { StreamPlayer } from "../src/audio.js";
import {
  applyLocalMode,
  applyServerMsg,
  audioEnabled,
  canvasBlank,
  decadeMode,
  initialState,
  startSession,
} from "../src/state.js";

describe("mode invariants", () => {
  it("auditory mode blanks the canvas", () => {
    const s = applyLocalMode(initialState(), "a");
    expect(canvasBlank(s)).toBe(true);
    expect(audioEnabled(s)).toBe(true);
  });

  it("visual mode disables audio", () => {
    const s = applyLocalMode(initialState(), "v");
    expect(audioEnabled(s)).toBe(false);
    expect(canvasBlank(s)).toBe(false);
  });

  it("switching into auditory mode forgets the target", () => {
    let s = applyServerMsg(initialState(), {
      type: "target", x: 1, y: 2, z: 3, visible: true,
    });
    expect(s.targetVisible).toBe(true);
    s = applyLocalMode(s, "a");
    expect(s.target).toBeNull();
    expect(s.targetVisible).toBe(false);
  });
});

describe("session flow", () => {
  it("start resets trial counters and applies the first decade mode", () => {
    const s = startSession(initialState(), decadeMode("v-av-a", 0));
    expect(s.sessionActive).toBe(true);
    expect(s.mode).toBe("v");
    expect(s.trialIndex).toBe(0);
  });

  it("decade mode schedule follows the order string", () => {
    expect(decadeMode("a-v-av", 0)).toBe("a");
    expect(decadeMode("a-v-av", 9)).toBe("a");
    expect(decadeMode("a-v-av", 10)).toBe("v");
    expect(decadeMode("a-v-av", 29)).toBe("av");
  });

  it("trial_done advances and the 30th closes the session", () => {
    let s = startSession(initialState(), "av");
    const metrics = { duration: 1, length: 2, prec: 0.1, prec_x: 0, prec_y: 0, prec_z: 0.1 };
    s = applyServerMsg(s, { type: "trial_done", trial: 1, metrics, dropped_poses: 0 });
    expect(s.trialIndex).toBe(1);
    expect(s.sessionActive).toBe(true);
    s = applyServerMsg(s, { type: "trial_done", trial: 30, metrics, dropped_poses: 0 });
    expect(s.sessionActive).toBe(false);
  });

  it("session_done records the file", () => {
    const s = applyServerMsg(initialState(), { type: "session_done", file: "x.json" });
    expect(s.sessionFile).toBe("x.json");
  });

  it("errors surface without clobbering the rest", () => {
    const s = applyServerMsg(initialState(), { type: "error", detail: "nope" });
    expect(s.lastError).toBe("nope");
    expect(s.mode).toBe("av");
  });
});

describe("audio gating independent of the server", () => {
  function frame(seq: number): ArrayBuffer {
    const buf = new ArrayBuffer(8 + 2);
    new DataView(buf).setUint32(0, seq, true);
    return buf;
  }

  it("a disabled player refuses frames entirely", () => {
    const player = new StreamPlayer();
    player.setEnabled(false);
    player.onBinaryFrame(frame(0));
    player.onBinaryFrame(frame(1));
    expect(player.depth).toBe(0);
  });

  it("disabling flushes whatever was buffered", () => {
    const player = new StreamPlayer();
    player.onBinaryFrame(frame(0));
    player.onBinaryFrame(frame(1));
    expect(player.depth).toBe(2);
    player.setEnabled(false);
    expect(player.depth).toBe(0);
  });
});
