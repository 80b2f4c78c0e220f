/**
 * Streamed-PCM playback through the Web Audio API.
 *
 * Blocks fall out of the jitter buffer onto an AudioContext timeline;
 * scheduling stays one block ahead of the hardware clock. The player
 * refuses frames entirely while disabled (visual mode), so audio can
 * never leak even if the server keeps streaming.
 */

import { JitterBuffer } from "./jitterBuffer.js";
import { BLOCK_SIZE, SAMPLE_RATE, decodePcmFrame } from "./protocol.js";

export class StreamPlayer {
  private ctx: AudioContext | null = null;
  private nextStart = 0;
  private timer: number | null = null;
  readonly buffer = new JitterBuffer(3);
  private enabled = true;

  setEnabled(on: boolean): void {
    if (this.enabled === on) return;
    this.enabled = on;
    if (!on) {
      this.buffer.clear(); // stop within one block
    }
  }

  get isEnabled(): boolean {
    return this.enabled;
  }

  get depth(): number {
    return this.buffer.depth;
  }

  get concealed(): number {
    return this.buffer.concealedBlocks;
  }

  onBinaryFrame(data: ArrayBuffer): void {
    if (!this.enabled) return;
    const frame = decodePcmFrame(data);
    this.buffer.push(frame.seq, frame.samples);
  }

  start(): void {
    if (this.timer !== null) return;
    this.ctx = new AudioContext({ sampleRate: SAMPLE_RATE });
    this.nextStart = this.ctx.currentTime;
    const blockDur = BLOCK_SIZE / SAMPLE_RATE;
    const tick = () => {
      if (!this.ctx) return;
      // keep scheduling while we are less than two blocks ahead
      while (this.nextStart < this.ctx.currentTime + 2 * blockDur) {
        const block = this.buffer.pull();
        if (block === null) {
          if (this.nextStart < this.ctx.currentTime) {
            this.nextStart = this.ctx.currentTime;
          }
          break;
        }
        const ab = this.ctx.createBuffer(1, block.length, SAMPLE_RATE);
        ab.copyToChannel(block as Float32Array<ArrayBuffer>, 0);
        const src = this.ctx.createBufferSource();
        src.buffer = ab;
        src.connect(this.ctx.destination);
        src.start(Math.max(this.nextStart, this.ctx.currentTime));
        this.nextStart = Math.max(this.nextStart, this.ctx.currentTime) + ab.duration;
      }
      this.timer = window.setTimeout(tick, blockDur * 500);
    };
    tick();
  }

  stop(): void {
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
    if (this.ctx) {
      void this.ctx.close();
      this.ctx = null;
    }
    this.buffer.clear();
  }
}
