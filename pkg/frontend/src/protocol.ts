/**
 * Wire protocol spoken with the guidance service.
 *
 * Text frames are JSON both ways; binary frames carry one audio block:
 * an 8-byte little-endian sequence number followed by 512 samples of
 * 16-bit little-endian mono PCM at 44100 Hz.
 */

export type Mode = "a" | "v" | "av";

export const SAMPLE_RATE = 44100;
export const BLOCK_SIZE = 512;

export interface ParamsMsg {
  type: "params";
  chroma_rate: number;
  am_freq: number;
  fm_index: number;
  brightness_shift: number;
  fullness: number;
  proximity_noise: boolean;
}

export interface TargetMsg {
  type: "target";
  x: number;
  y: number;
  z: number;
  visible: boolean;
}

export interface TrialDoneMsg {
  type: "trial_done";
  trial: number;
  metrics: {
    duration: number;
    length: number;
    prec: number;
    prec_x: number;
    prec_y: number;
    prec_z: number;
  };
  dropped_poses: number;
}

export interface SessionDoneMsg {
  type: "session_done";
  file: string;
}

export interface ErrorMsg {
  type: "error";
  detail: string;
}

export type ServerMsg = ParamsMsg | TargetMsg | TrialDoneMsg | SessionDoneMsg | ErrorMsg;

export function parseServerMsg(text: string): ServerMsg {
  const obj = JSON.parse(text);
  if (typeof obj !== "object" || obj === null || typeof obj.type !== "string") {
    throw new Error("not a protocol message");
  }
  switch (obj.type) {
    case "params":
    case "target":
    case "trial_done":
    case "session_done":
    case "error":
      return obj as ServerMsg;
    default:
      throw new Error(`unknown server message type ${obj.type}`);
  }
}

export function poseMsg(t: number, x: number, y: number, z: number): string {
  return JSON.stringify({ type: "pose", t, x, y, z });
}

export function clickMsg(): string {
  return JSON.stringify({ type: "click" });
}

export function modeMsg(value: Mode): string {
  return JSON.stringify({ type: "mode", value });
}

export function startSessionMsg(participantId: string, order: string): string {
  return JSON.stringify({ type: "start_session", participant_id: participantId, order });
}

export interface PcmFrame {
  seq: number;
  samples: Float32Array;
}

/** Decode one binary frame into float samples in [-1, 1]. */
export function decodePcmFrame(buf: ArrayBuffer): PcmFrame {
  if (buf.byteLength < 8) {
    throw new Error(`frame too short: ${buf.byteLength} bytes`);
  }
  const view = new DataView(buf);
  // sequence numbers stay far below 2^53, so float math is exact here
  const lo = view.getUint32(0, true);
  const hi = view.getUint32(4, true);
  const seq = hi * 4294967296 + lo;
  const n = (buf.byteLength - 8) / 2;
  const samples = new Float32Array(n);
  for (let i = 0; i < n; i++) {
    samples[i] = view.getInt16(8 + 2 * i, true) / 32767;
  }
  return { seq, samples };
}

export const GROUP_ORDERS = ["a-v-av", "a-av-v", "av-a-v", "av-v-a", "v-a-av", "v-av-a"] as const;
