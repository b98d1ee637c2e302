// @vitest-environment jsdom
//
// Round-trip test against a real gateway subprocess: the panel boots in a
// DOM, drives the server through its buttons, and the displayed state is
// checked against GET /state after every action.
import { spawn, type ChildProcess } from "node:child_process";
import { afterAll, beforeAll, describe, expect, it } from "vitest";
import { ApiClient } from "../src/api.js";
import { initPanel, type PanelHandle } from "../src/app.js";
import type { Snapshot } from "../src/types.js";

const PORT = 18300 + (process.pid % 500);
const BASE = `http://127.0.0.1:${PORT}`;

let server: ChildProcess;
let serverLog = "";
let panel: PanelHandle;
let root: HTMLElement;
let api: ApiClient;
const httpLog: string[] = [];
const toasts: string[] = [];

const loggingFetch: typeof fetch = async (input, init) => {
  const line = `${init?.method ?? "GET"} ${String(input)}`;
  const started = Date.now();
  try {
    const resp = await fetch(input, init);
    httpLog.push(`${line} -> ${resp.status} in ${Date.now() - started}ms`);
    return resp;
  } catch (err) {
    httpLog.push(`${line} -> ERR ${String(err)} in ${Date.now() - started}ms`);
    throw err;
  }
};

async function until<T>(
  probe: () => T | Promise<T>,
  ok: (value: T) => boolean,
  what: string,
  deadlineMs = 20000,
): Promise<T> {
  const end = Date.now() + deadlineMs;
  let last: T | undefined;
  while (Date.now() < end) {
    try {
      last = await probe();
      if (ok(last)) return last;
    } catch {
      // not up yet
    }
    await new Promise((r) => setTimeout(r, 50));
  }
  const toast = document.querySelector("#toast")?.textContent ?? "";
  let serverState = "unreachable";
  try {
    serverState = JSON.stringify(await api.getState());
  } catch {
    // leave as unreachable
  }
  throw new Error(
    `timed out waiting for ${what}; last=${JSON.stringify(last)}\n` +
      `toast=${JSON.stringify(toast)} toasts=${JSON.stringify(toasts)}\n` +
      `server=${serverState}\nhttp tail:\n${httpLog.slice(-25).join("\n")}\nserver log:\n${serverLog}`,
  );
}

const state = (): Promise<Snapshot> => api.getState();
const snap = (): Snapshot => panel.store.current.snapshot!;

const glyphState = (): string =>
  Array.from(root.querySelectorAll<SVGElement>(".light-glyph"))
    .map((g) => (g.classList.contains("lit") ? "1" : "0"))
    .join("");

/** The invariant under test: what the DOM shows is what GET /state says. */
async function expectDomMatchesServer(): Promise<void> {
  const truth = await state();
  expect(root.querySelector<HTMLElement>("#switch-row")!.dataset.state).toBe(truth.switches);
  expect(glyphState()).toBe(truth.controls);
  expect(root.querySelector<HTMLSelectElement>("#mode-select")!.value).toBe(truth.mode);
  expect(root.querySelector("#status-line")!.textContent).toContain(
    `scene ${truth.scene} run ${truth.run}`,
  );
}

beforeAll(async () => {
  server = spawn(
    "lfba",
    [
      "serve",
      "--host", "127.0.0.1",
      "--port", String(PORT),
      "--scene", "A00",
      "--run", "1",
      "--frame-period", "0.25",
      "--settle-delay", "0",
      "--majority-k", "3",
      "--event-log", `/tmp/e2e-events-${PORT}.jsonl`,
    ],
    { stdio: ["ignore", "pipe", "pipe"] },
  );
  server.stdout!.on("data", (chunk) => (serverLog += chunk));
  server.stderr!.on("data", (chunk) => (serverLog += chunk));
  api = new ApiClient(BASE, loggingFetch);
  await until(state, () => true, "gateway to accept /state");

  document.body.innerHTML = '<div id="app"></div>';
  root = document.getElementById("app")!;
  panel = initPanel(root, api, { fetchImpl: loggingFetch });
  panel.store.subscribe((s) => {
    if (s.toast && toasts[toasts.length - 1] !== s.toast) toasts.push(s.toast);
  });
  await until(
    () => panel.store.current,
    (s) => s.connected && s.snapshot !== null && s.catalog.length > 0,
    "panel to connect over the event stream",
  );
});

afterAll(() => {
  panel?.stop();
  server?.kill("SIGKILL");
});

describe("live gateway round trips", () => {
  it("clicking a switch lights the matching glyph within one snapshot cycle", async () => {
    expect(snap().switches).toBe("0000");
    root.querySelector<HTMLButtonElement>('[data-switch="2"]')!.click();
    // the next snapshot the panel applies must already carry the press
    await until(() => snap().switches, (bits) => bits === "0100", "press to land");
    expect(glyphState()).toBe("0100");
    expect(
      root.querySelector<SVGElement>('.light-glyph[data-light="2"]')!.classList.contains("lit"),
    ).toBe(true);
    await expectDomMatchesServer();
  });

  it("the mode selector drives the gateway", async () => {
    const select = root.querySelector<HTMLSelectElement>("#mode-select")!;
    select.value = "manual_training";
    select.dispatchEvent(new Event("change"));
    await until(() => snap().mode, (m) => m === "manual_training", "mode to apply");
    expect((await state()).mode).toBe("manual_training");
    await expectDomMatchesServer();
  });

  it("the scene mover drives the gateway and moves the occupant marker", async () => {
    const sceneSelect = root.querySelector<HTMLSelectElement>("#scene-select")!;
    expect(sceneSelect.options.length).toBe(13);
    sceneSelect.value = "A41";
    root.querySelector<HTMLInputElement>("#run-input")!.value = "2";
    root.querySelector<HTMLButtonElement>("#move-btn")!.click();
    await until(() => snap(), (s) => s.scene === "A41" && s.run === 2, "scene move to land");
    const confirmed = await state();
    expect(confirmed.scene).toBe("A41");
    expect(confirmed.run).toBe(2);
    expect(root.querySelector(".occupant")!.getAttribute("data-scene")).toBe("A41");
    await expectDomMatchesServer();
  });

  it("training on recorded presses renders the loss trace", async () => {
    // manual_training mode records a sample per frame; let a few accumulate
    await until(async () => (await state()).dataset_size, (size) => size >= 4, "server samples");
    await until(() => snap().dataset_size, (size) => size >= 4, "samples to record");
    root.querySelector<HTMLButtonElement>("#train-btn")!.click();
    await until(
      () => root.querySelector("#loss-chart polyline"),
      (line) => line !== null,
      "loss chart to render",
    );
    expect(root.querySelector("#loss-chart .chart-caption")!.textContent).toContain("epochs");
  });

  it("automation mode keeps the taught lights and marks the vote winner", async () => {
    const select = root.querySelector<HTMLSelectElement>("#mode-select")!;
    select.value = "automation";
    select.dispatchEvent(new Event("change"));
    await until(() => snap().mode, (m) => m === "automation", "automation to apply");
    // every recorded sample carried label 0100, so the vote settles there
    await until(
      () => snap().prediction_window,
      (w) => w.length >= 3,
      "prediction window to fill",
    );
    await until(
      () => root.querySelectorAll(".pred-row.winner").length,
      (count) => count === 1,
      "winner highlight",
    );
    expect(root.querySelector(".pred-row.winner")!.getAttribute("data-label")).toBe("4");
    expect((await state()).controls).toBe("0100");
    expect(glyphState()).toBe("0100");
    await expectDomMatchesServer();
  });

  it("camera frames reach the thumbnail", async () => {
    const canvas = root.querySelector<HTMLCanvasElement>("#frame-thumb")!;
    // painted frames resize the canvas to the camera's true resolution
    await until(() => canvas.width, (w) => w === 64, "frame to paint");
    expect(canvas.height).toBe(64);
  });

  it("killing the gateway greys the panel with a reconnect notice", async () => {
    server.kill("SIGKILL");
    await until(() => panel.store.current.connected, (c) => !c, "stream loss to surface");
    expect(root.classList.contains("disconnected")).toBe(true);
    const banner = root.querySelector<HTMLElement>("#reconnect-banner")!;
    expect(banner.hidden).toBe(false);
    expect(banner.textContent).toContain("reconnecting");
  });
});
