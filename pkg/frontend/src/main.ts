import { App } from "./app.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

const app = new App(el<HTMLCanvasElement>("scene"), {
  banner: el("banner"),
  status: el("status"),
  metrics: el("metrics"),
  participant: el<HTMLInputElement>("participant"),
  orderSelect: el<HTMLSelectElement>("order"),
  modeSelect: el<HTMLSelectElement>("mode"),
  startButton: el<HTMLButtonElement>("start"),
});

app.start();
