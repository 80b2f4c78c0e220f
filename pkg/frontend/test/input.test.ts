import { describe, expect, it } from "vitest";

import { InputLoop, KEEPALIVE_HZ, POSE_RATE_CAP_HZ } from "../src/input.js";
import { defaultCamera } from "../src/projection.js";

function makeLoop() {
  const sent: Array<[number, number, number]> = [];
  let clicks = 0;
  const loop = new InputLoop(
    // flush() never touches the canvas; listeners attach only in attach()
    {} as HTMLCanvasElement,
    () => defaultCamera(800, 600),
    {
      sendPose: (x, y, z) => sent.push([x, y, z]),
      sendClick: () => clicks++,
    },
    [0, 9.5, 0],
  );
  return { loop, sent, clicks: () => clicks };
}

describe("pose emission", () => {
  it("caps motion updates at 120 Hz", () => {
    const { loop, sent } = makeLoop();
    const capMs = 1000 / POSE_RATE_CAP_HZ;
    let t = 10_000;
    loop.flush(t); // baseline send
    for (let i = 0; i < 10; i++) {
      loop.probe[0] += 0.1;
      (loop as unknown as { dirty: boolean }).dirty = true;
      loop.flush(t + 1); // 1 ms later: below the cap interval
    }
    expect(sent.length).toBe(1);
    loop.flush(t + capMs + 0.1);
    expect(sent.length).toBe(2);
  });

  it("keeps a 5 Hz keepalive while idle", () => {
    const { loop, sent } = makeLoop();
    let t = 50_000;
    loop.flush(t);
    expect(sent.length).toBe(1);
    loop.flush(t + 10); // idle, too soon
    expect(sent.length).toBe(1);
    loop.flush(t + 1000 / KEEPALIVE_HZ);
    expect(sent.length).toBe(2);
    loop.flush(t + 2 * (1000 / KEEPALIVE_HZ));
    expect(sent.length).toBe(3);
  });

  it("keepalive repeats the held position", () => {
    const { loop, sent } = makeLoop();
    loop.flush(5000);
    loop.flush(6000);
    expect(sent.length).toBe(2);
    expect(sent[1]).toEqual(sent[0]);
  });
});
