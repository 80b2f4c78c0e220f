/**
 * Fixed-target jitter buffer for streamed PCM blocks.
 *
 * Playback only starts once `target` blocks are queued; a jump in the
 * sequence numbers is concealed by inserting silent blocks so the output
 * clock never slips relative to the stream.
 */

import { BLOCK_SIZE } from "./protocol.js";

export class JitterBuffer {
  private queue: Float32Array[] = [];
  private expectedSeq: number | null = null;
  private started = false;
  readonly target: number;
  readonly maxDepth: number;
  concealedBlocks = 0;
  droppedBlocks = 0;

  constructor(target = 3, maxDepth = 12) {
    this.target = target;
    this.maxDepth = maxDepth;
  }

  get depth(): number {
    return this.queue.length;
  }

  push(seq: number, samples: Float32Array): void {
    if (this.expectedSeq !== null) {
      if (seq < this.expectedSeq) {
        this.droppedBlocks += 1; // stale or duplicated frame
        return;
      }
      for (let missing = seq - this.expectedSeq; missing > 0; missing--) {
        this.queue.push(new Float32Array(BLOCK_SIZE));
        this.concealedBlocks += 1;
      }
    }
    this.expectedSeq = seq + 1;
    this.queue.push(samples);
    while (this.queue.length > this.maxDepth) {
      this.queue.shift();
      this.droppedBlocks += 1;
    }
  }

  /** Next block to play, or null while (re)filling to the target depth. */
  pull(): Float32Array | null {
    if (!this.started) {
      if (this.queue.length < this.target) {
        return null;
      }
      this.started = true;
    }
    const block = this.queue.shift();
    if (block === undefined) {
      this.started = false; // underrun: refill before resuming
      return null;
    }
    return block;
  }

  clear(): void {
    this.queue = [];
    this.expectedSeq = null;
    this.started = false;
  }
}
