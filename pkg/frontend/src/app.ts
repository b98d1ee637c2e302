import { ApiClient, ApiError } from "./api.js";
import { decodePgm, paintGray } from "./pgm.js";
import { renderFeed } from "./render/feed.js";
import { renderLossChart } from "./render/lossChart.js";
import { renderPredictionBar } from "./render/predictionBar.js";
import { renderRoom } from "./render/room.js";
import { connectEvents } from "./sse.js";
import { PanelStore, type PanelState } from "./store.js";
import type { Snapshot } from "./types.js";

const TOAST_MS = 4000;

export interface PanelOptions {
  setTimeoutImpl?: (fn: () => void, ms: number) => unknown;
  fetchImpl?: typeof fetch;
}

export interface PanelHandle {
  store: PanelStore;
  stop: () => void;
}

const SKELETON = `
  <header class="panel-header">
    <h1>Room Control Panel</h1>
    <span id="conn-status" class="conn-status">connecting</span>
  </header>
  <div id="reconnect-banner" class="reconnect-banner" hidden></div>
  <div id="toast" class="toast" hidden></div>
  <main class="panel-main">
    <section class="card">
      <h2>Room</h2>
      <div id="room" class="room-host"></div>
      <canvas id="frame-thumb" class="frame-thumb" width="64" height="64"></canvas>
      <p id="status-line" class="status-line"></p>
    </section>
    <section class="card">
      <h2>Switches</h2>
      <div id="switch-row" class="switch-row"></div>
      <h2>Mode</h2>
      <select id="mode-select">
        <option value="manual">manual</option>
        <option value="manual_training">manual (training)</option>
        <option value="automation">automation</option>
      </select>
      <h2>Scene</h2>
      <div class="scene-mover">
        <select id="scene-select"></select>
        <input id="run-input" type="number" min="1" value="1">
        <button id="move-btn">Move</button>
      </div>
      <h2>Clock</h2>
      <button id="clock-btn">Pause clock</button>
      <h2>Model</h2>
      <button id="train-btn">Train</button>
      <div id="loss-chart" class="loss-chart"></div>
    </section>
    <section class="card">
      <h2>Prediction</h2>
      <div id="prediction-bar" class="prediction-bar"></div>
    </section>
    <section class="card">
      <h2>Events</h2>
      <ul id="feed" class="feed"></ul>
    </section>
  </main>
`;

/** Boot the panel inside root; all server traffic goes through api. */
export function initPanel(
  root: HTMLElement,
  api: ApiClient,
  options: PanelOptions = {},
): PanelHandle {
  const schedule = options.setTimeoutImpl ?? ((fn: () => void, ms: number) => setTimeout(fn, ms));
  root.innerHTML = SKELETON;
  root.classList.add("panel", "disconnected");

  const ref = <T extends HTMLElement>(id: string): T =>
    root.querySelector<T>(`#${id}`)!;
  const connStatus = ref<HTMLSpanElement>("conn-status");
  const banner = ref<HTMLDivElement>("reconnect-banner");
  const toast = ref<HTMLDivElement>("toast");
  const roomHost = ref<HTMLDivElement>("room");
  const thumb = ref<HTMLCanvasElement>("frame-thumb");
  const statusLine = ref<HTMLParagraphElement>("status-line");
  const switchRow = ref<HTMLDivElement>("switch-row");
  const modeSelect = ref<HTMLSelectElement>("mode-select");
  const sceneSelect = ref<HTMLSelectElement>("scene-select");
  const runInput = ref<HTMLInputElement>("run-input");
  const moveBtn = ref<HTMLButtonElement>("move-btn");
  const clockBtn = ref<HTMLButtonElement>("clock-btn");
  const trainBtn = ref<HTMLButtonElement>("train-btn");
  const lossHost = ref<HTMLDivElement>("loss-chart");
  const predHost = ref<HTMLDivElement>("prediction-bar");
  const feedHost = ref<HTMLUListElement>("feed");

  const store = new PanelStore();

  // -- server mutations -------------------------------------------------------

  const fail = (err: unknown) => {
    const message = err instanceof ApiError ? err.message : String(err);
    store.showToast(message);
    schedule(() => store.clearToast(), TOAST_MS);
  };

  // One request per action; the UI only moves when the server answers.
  const act = (call: () => Promise<Snapshot>) => {
    call().then(
      (snapshot) => store.applySnapshot(snapshot),
      (err) => fail(err),
    );
  };

  modeSelect.addEventListener("change", () => act(() => api.setMode(modeSelect.value)));
  moveBtn.addEventListener("click", () => {
    const run = parseInt(runInput.value, 10);
    act(() => api.setScene(sceneSelect.value, Number.isFinite(run) ? run : undefined));
  });
  clockBtn.addEventListener("click", () => {
    const snap = store.current.snapshot;
    if (!snap) return;
    act(() => api.setClock({ paused: !snap.paused }));
  });
  trainBtn.addEventListener("click", () => {
    trainBtn.disabled = true;
    api.train().then(
      (result) => {
        trainBtn.disabled = false;
        store.setTrainResult(result);
      },
      (err) => {
        trainBtn.disabled = false;
        fail(err);
      },
    );
  });

  let switchCount = 0;
  const buildSwitchRow = (n: number) => {
    switchCount = n;
    switchRow.innerHTML = "";
    for (let i = 1; i <= n; i++) {
      const btn = document.createElement("button");
      btn.className = "switch-btn";
      btn.dataset.switch = String(i);
      btn.textContent = `s${i}`;
      btn.addEventListener("click", () => act(() => api.pressSwitch(i)));
      switchRow.appendChild(btn);
    }
  };

  // -- camera thumbnail ---------------------------------------------------------

  let paintedFrame = -1;
  let frameInFlight = false;
  const refreshThumb = (snapshot: Snapshot) => {
    if (frameInFlight || snapshot.frame_id === paintedFrame) return;
    frameInFlight = true;
    const target = snapshot.frame_id;
    api.fetchFrame().then(
      (buf) => {
        frameInFlight = false;
        paintedFrame = target;
        paintGray(thumb, decodePgm(buf));
      },
      () => {
        frameInFlight = false; // decorative; retry on the next snapshot
      },
    );
  };

  // -- rendering ----------------------------------------------------------------

  const render = (state: PanelState) => {
    root.classList.toggle("disconnected", !state.connected);
    connStatus.textContent = state.connected ? "live" : "disconnected";
    banner.hidden = state.connected;
    if (!state.connected) {
      banner.textContent = state.retryMs
        ? `Connection lost, reconnecting in ${(state.retryMs / 1000).toFixed(1)} s`
        : "Connection lost, reconnecting";
    }

    toast.hidden = state.toast === null;
    toast.textContent = state.toast ?? "";

    if (sceneSelect.options.length === 0 && state.catalog.length > 0) {
      for (const entry of state.catalog) {
        const option = document.createElement("option");
        option.value = entry.id;
        option.textContent = `${entry.id} ${entry.description} (${entry.output})`;
        sceneSelect.appendChild(option);
      }
      if (state.snapshot) sceneSelect.value = state.snapshot.scene;
    }

    const snap = state.snapshot;
    renderRoom(roomHost, snap);
    renderPredictionBar(predHost, snap);
    renderLossChart(lossHost, state.train);
    renderFeed(feedHost, state.feed);

    if (snap) {
      if (switchCount !== snap.n) buildSwitchRow(snap.n);
      switchRow.dataset.state = snap.switches;
      switchRow.querySelectorAll<HTMLButtonElement>(".switch-btn").forEach((btn, i) => {
        btn.classList.toggle("on", snap.switches.charAt(i) === "1");
      });
      modeSelect.value = snap.mode;
      clockBtn.textContent = snap.paused ? "Resume clock" : "Pause clock";
      statusLine.textContent =
        `scene ${snap.scene} run ${snap.run} | sim t=${snap.sim_time.toFixed(1)}` +
        ` | dataset ${snap.dataset_size} | frame ${snap.frame_id}` +
        (snap.degraded ? " | DEGRADED: predictor failing, controls held" : "");
      refreshThumb(snap);
    }
  };

  store.subscribe(render);
  render(store.current);

  // -- server data in -------------------------------------------------------------

  api.getCatalog().then(
    (catalog) => store.setCatalog(catalog),
    (err) => fail(err),
  );

  const stopStream = connectEvents(
    api.url("/events"),
    {
      onEvent: (event) => store.applyEvent(event),
      onStatus: (connected, retryMs) => store.setConnection(connected, retryMs),
    },
    { fetchImpl: options.fetchImpl, setTimeoutImpl: options.setTimeoutImpl },
  );

  return { store, stop: stopStream };
}
