/**
 * Wires websocket, input, audio, and rendering together around one
 * ViewState. Reconnects with a visible banner when the link drops.
 */

import { StreamPlayer } from "./audio.js";
import { InputLoop } from "./input.js";
import { defaultCamera } from "./projection.js";
import type { Mode } from "./protocol.js";
import {
  GROUP_ORDERS,
  clickMsg,
  modeMsg,
  parseServerMsg,
  poseMsg,
  startSessionMsg,
} from "./protocol.js";
import { renderScene } from "./scene.js";
import {
  applyLocalMode,
  applyServerMsg,
  audioEnabled,
  decadeMode,
  initialState,
  startSession,
} from "./state.js";
import type { ViewState } from "./state.js";

export class App {
  state: ViewState = initialState();
  private ws: WebSocket | null = null;
  private player = new StreamPlayer();
  private input: InputLoop;
  private order: string = GROUP_ORDERS[0];
  private reconnectDelay = 500;

  constructor(
    private readonly canvas: HTMLCanvasElement,
    private readonly panel: {
      banner: HTMLElement;
      status: HTMLElement;
      metrics: HTMLElement;
      participant: HTMLInputElement;
      orderSelect: HTMLSelectElement;
      modeSelect: HTMLSelectElement;
      startButton: HTMLButtonElement;
    },
  ) {
    this.input = new InputLoop(
      canvas,
      () => defaultCamera(canvas.width, canvas.height),
      {
        sendPose: (x, y, z) => {
          this.state.probe = [x, y, z];
          this.send(poseMsg(performance.now() / 1000, x, y, z));
        },
        sendClick: () => this.send(clickMsg()),
      },
      this.state.probe,
    );
  }

  start(): void {
    for (const order of GROUP_ORDERS) {
      const opt = document.createElement("option");
      opt.value = order;
      opt.textContent = order;
      this.panel.orderSelect.appendChild(opt);
    }
    this.panel.startButton.addEventListener("click", () => {
      const pid = this.panel.participant.value.trim() || "anon";
      this.order = this.panel.orderSelect.value;
      this.state = startSession(this.state, decadeMode(this.order, 0));
      this.send(startSessionMsg(pid, this.order));
      this.syncAudioToMode();
    });
    this.panel.modeSelect.addEventListener("change", () => {
      const mode = this.panel.modeSelect.value as Mode;
      this.state = applyLocalMode(this.state, mode);
      this.send(modeMsg(mode));
      this.syncAudioToMode();
    });
    this.input.attach();
    this.player.start();
    this.connect();
    const draw = () => {
      this.tickState();
      renderScene(
        this.canvas.getContext("2d")!,
        defaultCamera(this.canvas.width, this.canvas.height),
        this.state,
      );
      this.updatePanel();
      requestAnimationFrame(draw);
    };
    requestAnimationFrame(draw);
  }

  private connect(): void {
    const proto = location.protocol === "https:" ? "wss" : "ws";
    const ws = new WebSocket(`${proto}://${location.host}/session`);
    ws.binaryType = "arraybuffer";
    ws.onopen = () => {
      this.state = { ...this.state, connected: true };
      this.reconnectDelay = 500;
      this.panel.banner.style.display = "none";
    };
    ws.onmessage = (ev) => {
      if (typeof ev.data === "string") {
        this.onText(ev.data);
      } else {
        this.player.onBinaryFrame(ev.data as ArrayBuffer);
      }
    };
    ws.onclose = () => {
      this.state = { ...this.state, connected: false };
      this.panel.banner.style.display = "block";
      this.ws = null;
      window.setTimeout(() => this.connect(), this.reconnectDelay);
      this.reconnectDelay = Math.min(this.reconnectDelay * 2, 5000);
    };
    this.ws = ws;
  }

  private onText(text: string): void {
    const msg = parseServerMsg(text);
    const before = this.state.trialIndex;
    this.state = applyServerMsg(this.state, msg);
    if (msg.type === "trial_done" && this.state.sessionActive) {
      // the decade schedule may flip the mode on the next trial
      const next = decadeMode(this.order, before + 1 <= 29 ? before + 1 : 29);
      if (next !== this.state.mode) {
        this.state = applyLocalMode(this.state, next);
        this.syncAudioToMode();
      }
    }
  }

  private tickState(): void {
    this.state = {
      ...this.state,
      bufferDepth: this.player.depth,
      concealedBlocks: this.player.concealed,
    };
  }

  private syncAudioToMode(): void {
    this.player.setEnabled(audioEnabled(this.state));
  }

  private send(text: string): void {
    if (this.ws && this.ws.readyState === WebSocket.OPEN) {
      this.ws.send(text);
    }
  }

  private updatePanel(): void {
    const s = this.state;
    this.panel.status.textContent =
      `mode ${s.mode} | trial ${s.trialIndex}/30 | buffer ${s.bufferDepth}` +
      (s.concealedBlocks ? ` | concealed ${s.concealedBlocks}` : "") +
      (s.connected ? "" : " | offline");
    if (s.lastTrial) {
      const m = s.lastTrial.metrics;
      this.panel.metrics.textContent =
        `trial ${s.lastTrial.trial}: ${m.duration.toFixed(2)} s, ` +
        `${m.length.toFixed(1)} cm, prec ${m.prec.toFixed(2)} cm ` +
        `(x ${m.prec_x.toFixed(2)} y ${m.prec_y.toFixed(2)} z ${m.prec_z.toFixed(2)})`;
    }
    if (s.sessionFile) {
      this.panel.metrics.textContent += ` | saved: ${s.sessionFile}`;
    }
    if (s.lastError) {
      this.panel.banner.textContent = s.lastError;
      this.panel.banner.style.display = "block";
    }
  }
}
