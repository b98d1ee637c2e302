"""Runtime shell: simulated clock and ticker, single-consumer event loop,
HTTP+JSON control/observation API with a server-sent event stream.

All mutable controller state is owned by one consumer thread.  API handlers
and the frame ticker only enqueue events (stamped with simulated time under
the queue lock, so queue order equals timestamp order) and read immutable
published snapshots.  Mutating endpoints wait for their event to be applied
before responding, which gives read-your-writes.
"""

from __future__ import annotations

import json
import os
import queue
import threading
import time
from collections import deque
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Callable, Dict, List, Optional

import numpy as np

from . import dataset as dataset_store
from . import eventlog, pgm, scenes
from .codec import decode_label
from .controller import (
    ControllerState,
    EmitControl,
    Event,
    FrameCaptured,
    Log,
    Mode,
    ModeChanged,
    PredictionFailed,
    PredictionReady,
    RecordSample,
    RequestPrediction,
    StaleEventError,
    SwitchPressed,
    handle_event,
    initial_state,
)
from .predictor import (
    PredictorModel,
    TrainConfig,
    load_model,
    predict,
    remote_predict,
    save_model,
    train,
    zero_model,
)

API_MODES = {mode.value: mode for mode in Mode}


@dataclass(frozen=True)
class GatewayConfig:
    host: str = "127.0.0.1"
    port: int = 0  # 0 picks an ephemeral port
    n: int = 4
    frame_period: float = 1.0  # simulated seconds between camera frames
    tick_rate: float = 1.0  # simulated seconds per real second
    start_paused: bool = False
    settle_delay: float = 5.0
    majority_k: int = 3
    scene: str = "A00"
    run: int = 1
    seed: int = 0
    generator: scenes.GeneratorConfig = field(default_factory=scenes.GeneratorConfig)
    dataset_path: Optional[str] = None
    model_path: Optional[str] = None
    static_dir: Optional[str] = None
    external_predictor: Optional[str] = None
    predictor_timeout: float = 2.0
    event_log_path: Optional[str] = None
    train_exclude_override: bool = False

    def __post_init__(self):
        if self.frame_period <= 0:
            raise ValueError("frame_period must be > 0")
        if self.tick_rate <= 0:
            raise ValueError("tick_rate must be > 0")
        if self.scene not in scenes.catalog_by_id():
            raise ValueError(f"unknown scene {self.scene!r}")
        if self.run < 1:
            raise ValueError("run must be >= 1")


class SimClock:
    """Simulated seconds advancing at a configurable multiple of real time."""

    def __init__(self, rate: float = 1.0, paused: bool = False):
        self._lock = threading.Lock()
        self._base = 0.0
        self._anchor = time.monotonic()
        self._rate = rate
        self._paused = paused

    def now(self) -> float:
        with self._lock:
            return self._now_locked()

    def _now_locked(self) -> float:
        if self._paused:
            return self._base
        return self._base + (time.monotonic() - self._anchor) * self._rate

    def configure(self, paused: Optional[bool] = None, rate: Optional[float] = None) -> None:
        with self._lock:
            self._base = self._now_locked()
            self._anchor = time.monotonic()
            if paused is not None:
                self._paused = bool(paused)
            if rate is not None:
                if rate <= 0:
                    raise ValueError("clock rate must be > 0")
                self._rate = float(rate)

    def state(self) -> Dict[str, float]:
        with self._lock:
            return {"paused": self._paused, "rate": self._rate, "sim_time": self._now_locked()}


class _Waiter:
    def __init__(self):
        self._done = threading.Event()
        self.snapshot: Optional[dict] = None
        self.error: Optional[Exception] = None

    def resolve(self, snapshot: Optional[dict], error: Optional[Exception] = None) -> None:
        self.snapshot = snapshot
        self.error = error
        self._done.set()

    def wait(self, timeout: float = 10.0) -> dict:
        if not self._done.wait(timeout):
            raise TimeoutError("event was not applied in time")
        if self.error is not None:
            raise self.error
        return self.snapshot


class Gateway:
    """Owns the live system: controller, clock, dataset, model, HTTP surface."""

    def __init__(self, config: GatewayConfig):
        self.config = config
        self.clock = SimClock(rate=config.tick_rate, paused=config.start_paused)

        self._ctrl_state: ControllerState = initial_state(
            n=config.n, settle_delay=config.settle_delay, majority_k=config.majority_k
        )
        self._state_lock = threading.Lock()
        self._last_frame: Optional[scenes.SceneFrame] = None
        self._last_prediction = None
        self._frame_count = 0

        self._queue = deque()
        self._queue_cond = threading.Condition()

        self._scene_lock = threading.Lock()
        self._scene = config.scene
        self._run = config.run
        self._draw_counts: Dict[tuple, int] = {}
        self._scene_index = {e.id: i for i, e in enumerate(scenes.catalog())}

        self._dataset_lock = threading.Lock()
        self._dataset = dataset_store.Dataset(n=config.n, d=scenes.FEATURE_DIM)
        self._dataset_fh = None

        self._model_lock = threading.Lock()
        self._model: PredictorModel = zero_model(config.n, scenes.FEATURE_DIM)
        self._train_lock = threading.Lock()

        self._job_cond = threading.Condition()
        self._pending_frame = None

        self._subs_lock = threading.Lock()
        self._subscribers: List[queue.Queue] = []

        self._event_log_fh = None
        self._running = False
        self._threads: List[threading.Thread] = []
        self._httpd: Optional[ThreadingHTTPServer] = None
        self.port: Optional[int] = None

    # -- lifecycle -----------------------------------------------------------

    def start(self) -> None:
        cfg = self.config
        if cfg.dataset_path:
            if os.path.exists(cfg.dataset_path) and os.path.getsize(cfg.dataset_path) > 0:
                loaded = dataset_store.load(cfg.dataset_path)
                if loaded.n != cfg.n or loaded.d != scenes.FEATURE_DIM:
                    raise ValueError(
                        f"dataset at {cfg.dataset_path} has n={loaded.n} d={loaded.d}, "
                        f"gateway expects n={cfg.n} d={scenes.FEATURE_DIM}"
                    )
                self._dataset = loaded
                self._dataset_fh = open(cfg.dataset_path, "a", encoding="utf-8")
            else:
                self._dataset_fh = open(cfg.dataset_path, "w", encoding="utf-8")
                self._dataset_fh.write(dataset_store.header_line(cfg.n, scenes.FEATURE_DIM) + "\n")
                self._dataset_fh.flush()
        if cfg.model_path and os.path.exists(cfg.model_path):
            model = load_model(cfg.model_path)
            if model.n != cfg.n:
                raise ValueError(f"model at {cfg.model_path} has n={model.n}, expected {cfg.n}")
            self._model = model
        if cfg.event_log_path:
            self._event_log_fh = open(cfg.event_log_path, "w", encoding="utf-8")

        self._running = True
        self._threads = [
            threading.Thread(target=self._consumer_loop, name="lfba-consumer", daemon=True),
            threading.Thread(target=self._ticker_loop, name="lfba-ticker", daemon=True),
            threading.Thread(target=self._predictor_loop, name="lfba-predictor", daemon=True),
        ]
        for t in self._threads:
            t.start()

        handler = _make_handler(self)
        self._httpd = ThreadingHTTPServer((cfg.host, cfg.port), handler)
        self._httpd.daemon_threads = True
        self.port = self._httpd.server_address[1]
        server_thread = threading.Thread(target=self._httpd.serve_forever, name="lfba-http", daemon=True)
        server_thread.start()
        self._threads.append(server_thread)

    def stop(self) -> None:
        self._running = False
        with self._queue_cond:
            self._queue_cond.notify_all()
        with self._job_cond:
            self._job_cond.notify_all()
        with self._subs_lock:
            for q in self._subscribers:
                q.put(None)
        if self._httpd is not None:
            self._httpd.shutdown()
            self._httpd.server_close()
        for t in self._threads:
            t.join(timeout=5)
        if self._dataset_fh:
            self._dataset_fh.close()
            self._dataset_fh = None
        if self._event_log_fh:
            self._event_log_fh.close()
            self._event_log_fh = None

    @property
    def base_url(self) -> str:
        return f"http://{self.config.host}:{self.port}"

    # -- event intake ----------------------------------------------------------

    def submit(self, build: Callable[[float], Event], wait: bool = True) -> Optional[dict]:
        """Stamp, enqueue, and optionally wait until the event has been applied."""
        if not self._running:
            raise RuntimeError("gateway is not running")
        waiter = _Waiter() if wait else None
        with self._queue_cond:
            event = build(self.clock.now())
            self._queue.append((event, waiter))
            self._queue_cond.notify()
        if waiter is None:
            return None
        return waiter.wait()

    # -- threads ---------------------------------------------------------------

    def _consumer_loop(self) -> None:
        while self._running:
            with self._queue_cond:
                while not self._queue and self._running:
                    self._queue_cond.wait(timeout=0.2)
                if not self._running:
                    break
                event, waiter = self._queue.popleft()
            try:
                new_state, effects = handle_event(self._ctrl_state, event)
            except (StaleEventError, ValueError) as exc:
                # bad events are rejected, never allowed to kill the loop
                if waiter:
                    waiter.resolve(None, error=exc)
                continue
            for effect in effects:
                self._execute_effect(effect, event)
            with self._state_lock:
                self._ctrl_state = new_state
                if isinstance(event, FrameCaptured):
                    self._frame_count += 1
                    self._last_frame = event.frame
                elif isinstance(event, PredictionReady):
                    self._last_prediction = event.prediction
            if self._event_log_fh:
                self._event_log_fh.write(eventlog.log_line(event, effects) + "\n")
                self._event_log_fh.flush()
            if isinstance(event, PredictionReady):
                self._broadcast(
                    "prediction",
                    {
                        "probs": [float(p) for p in event.prediction.probs],
                        "bits": str(decode_label(event.prediction.argmax)),
                        "label": event.prediction.argmax.value,
                    },
                    timestamp=event.timestamp,
                )
            snapshot = self.snapshot()
            self._broadcast("state", snapshot, timestamp=event.timestamp)
            if waiter:
                waiter.resolve(snapshot)

    def _ticker_loop(self) -> None:
        next_frame = None
        while self._running:
            period = self.config.frame_period
            clock_state = self.clock.state()
            rate = clock_state["rate"]
            time.sleep(min(max(period / rate / 4.0, 0.001), 0.05))
            if not self._running:
                break
            if clock_state["paused"]:
                continue
            now = self.clock.now()
            if next_frame is None:
                next_frame = now + period
                continue
            emitted = 0
            while now >= next_frame and emitted < 8 and self._running:
                frame = self._render_current(next_frame)
                try:
                    self.submit(lambda ts, f=frame: FrameCaptured(timestamp=ts, frame=f), wait=False)
                except RuntimeError:
                    return
                next_frame += period
                emitted += 1
            if emitted == 8 and now >= next_frame:
                next_frame = now + period  # shed backlog after a long stall

    def _render_current(self, nominal_time: float) -> scenes.SceneFrame:
        with self._scene_lock:
            scene_id, run = self._scene, self._run
            key = (scene_id, run)
            index = self._draw_counts.get(key, 0)
            self._draw_counts[key] = index + 1
        thread_rng = np.random.default_rng(
            [self.config.seed, 7777, self._scene_index[scene_id], run, index]
        )
        return scenes.render_frame(scene_id, run, self.config.generator, thread_rng, timestamp=nominal_time)

    def _predictor_loop(self) -> None:
        while self._running:
            with self._job_cond:
                while self._pending_frame is None and self._running:
                    self._job_cond.wait(timeout=0.2)
                if not self._running:
                    break
                frame = self._pending_frame
                self._pending_frame = None
            try:
                if self.config.external_predictor:
                    prediction = remote_predict(
                        self.config.external_predictor,
                        frame.features,
                        self.config.n,
                        timeout=self.config.predictor_timeout,
                    )
                else:
                    with self._model_lock:
                        model = self._model
                    prediction = predict(model, frame.features)
                self.submit(lambda ts, p=prediction: PredictionReady(timestamp=ts, prediction=p), wait=False)
            except Exception as exc:  # any failure degrades, never crashes
                try:
                    self.submit(lambda ts, m=str(exc): PredictionFailed(timestamp=ts, reason=m), wait=False)
                except RuntimeError:
                    return

    # -- effects ---------------------------------------------------------------

    def _execute_effect(self, effect, event: Event) -> None:
        if isinstance(effect, EmitControl):
            self._broadcast("control", {"bits": str(effect.controls)}, timestamp=event.timestamp)
        elif isinstance(effect, RecordSample):
            frame = effect.frame
            record = dataset_store.SampleRecord(
                features=frame.features,
                label=effect.label.value,
                label_bits=str(decode_label(effect.label)),
                run=frame.run,
                timestamp=frame.timestamp,
                source=effect.source,
                scene=frame.scene,
            )
            with self._dataset_lock:
                self._dataset.append(record)
                if self._dataset_fh:
                    self._dataset_fh.write(dataset_store.record_line(record) + "\n")
                    self._dataset_fh.flush()
            self._broadcast(
                "sample",
                {
                    "bits": record.label_bits,
                    "source": record.source,
                    "scene": record.scene,
                    "run": record.run,
                },
                timestamp=event.timestamp,
            )
        elif isinstance(effect, RequestPrediction):
            with self._job_cond:
                self._pending_frame = effect.frame  # newest frame wins
                self._job_cond.notify()
        elif isinstance(effect, Log):
            pass  # decision detail, kept in the event log only

    # -- observation -------------------------------------------------------------

    def snapshot(self) -> dict:
        with self._state_lock:
            st = self._ctrl_state
            frame_count = self._frame_count
            last_pred = self._last_prediction
        clock_state = self.clock.state()
        with self._scene_lock:
            scene_id, run = self._scene, self._run
        with self._dataset_lock:
            dataset_size = len(self._dataset)
        with self._model_lock:
            model_meta = {
                "n": self._model.n,
                "feature_dim": self._model.feature_dim,
                "classes": self._model.num_classes,
            }
        prediction = None
        if last_pred is not None:
            prediction = {
                "probs": [float(p) for p in last_pred.probs],
                "bits": str(decode_label(last_pred.argmax)),
                "label": last_pred.argmax.value,
            }
        return {
            "switches": str(st.switches),
            "controls": str(st.controls),
            "mode": st.mode.value,
            "degraded": st.degraded,
            "settle_until": st.settle_until,
            "prediction_window": list(st.prediction_window),
            "majority_k": st.majority_k,
            "n": self.config.n,
            "scene": scene_id,
            "run": run,
            "frame_id": frame_count,
            "frame_period": self.config.frame_period,
            "last_prediction": prediction,
            "dataset_size": dataset_size,
            "model": model_meta,
            **clock_state,
        }

    def frame_pgm(self) -> bytes:
        with self._state_lock:
            frame = self._last_frame
        if frame is None or not hasattr(frame, "image"):
            frame = self._render_current(self.clock.now())
        return pgm.encode(frame.image)

    # -- mutations outside the controller -----------------------------------------

    def set_scene(self, scene_id: str, run: Optional[int] = None) -> dict:
        if scene_id not in self._scene_index:
            raise ValueError(f"unknown scene {scene_id!r}")
        if run is not None and run < 1:
            raise ValueError("run must be >= 1")
        with self._scene_lock:
            self._scene = scene_id
            if run is not None:
                self._run = run
        snapshot = self.snapshot()
        self._broadcast("scene", {"scene": scene_id, "run": snapshot["run"]})
        return snapshot

    def set_clock(self, paused: Optional[bool] = None, rate: Optional[float] = None) -> dict:
        self.clock.configure(paused=paused, rate=rate)
        snapshot = self.snapshot()
        self._broadcast("clock", {"paused": snapshot["paused"], "rate": snapshot["rate"]})
        return snapshot

    def train_now(self, overrides: Optional[dict] = None) -> dict:
        overrides = overrides or {}
        allowed = {"learning_rate", "momentum", "batch_size", "epochs", "seed"}
        unknown = set(overrides) - allowed
        if unknown:
            raise ValueError(f"unknown training options: {sorted(unknown)}")
        with self._dataset_lock:
            records = list(self._dataset.records)
        excluded = {"automation"}
        if self.config.train_exclude_override:
            excluded.add("override")
        records = [r for r in records if r.source not in excluded]
        if not records:
            raise ValueError("no trainable samples recorded yet")
        with self._train_lock:
            training_set = dataset_store.Dataset(n=self.config.n, d=scenes.FEATURE_DIM, records=records)
            cfg = TrainConfig(**overrides)
            model, trace = train(training_set, cfg)
            with self._model_lock:
                self._model = model
            if self.config.model_path:
                save_model(model, self.config.model_path)
        self._broadcast("model", {"samples": len(records), "final_loss": trace[-1]})
        return {
            "loss_trace": trace,
            "samples": len(records),
            "epochs": cfg.epochs,
            "model": {"n": model.n, "feature_dim": model.feature_dim},
        }

    # -- event stream ---------------------------------------------------------------

    def subscribe(self) -> queue.Queue:
        q: queue.Queue = queue.Queue(maxsize=1000)
        with self._subs_lock:
            self._subscribers.append(q)
        return q

    def unsubscribe(self, q: queue.Queue) -> None:
        with self._subs_lock:
            if q in self._subscribers:
                self._subscribers.remove(q)

    def _broadcast(self, kind: str, payload: dict, timestamp: Optional[float] = None) -> None:
        record = {
            "timestamp": self.clock.now() if timestamp is None else timestamp,
            "kind": kind,
            "payload": payload,
        }
        with self._subs_lock:
            subscribers = list(self._subscribers)
        for q in subscribers:
            try:
                q.put_nowait(record)
            except queue.Full:
                pass  # slow consumer loses events rather than stalling the loop


# -- HTTP surface -------------------------------------------------------------


def _make_handler(gateway: Gateway):
    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def log_message(self, fmt, *args):
            pass

        # -- helpers --------------------------------------------------------

        def _send_json(self, obj, status: int = 200) -> None:
            body = json.dumps(obj).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def _fail(self, status: int, message: str) -> None:
            self._send_json({"error": message}, status=status)

        def _read_body(self) -> dict:
            length = int(self.headers.get("Content-Length") or 0)
            if length == 0:
                return {}
            raw = self.rfile.read(length)
            try:
                obj = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise ValueError(f"invalid JSON body: {exc}") from exc
            if not isinstance(obj, dict):
                raise ValueError("body must be a JSON object")
            return obj

        # -- GET ------------------------------------------------------------

        def do_GET(self):
            path = self.path.split("?", 1)[0]
            if path == "/state":
                self._send_json(gateway.snapshot())
            elif path == "/frame":
                data = gateway.frame_pgm()
                self.send_response(200)
                self.send_header("Content-Type", "image/x-portable-graymap")
                self.send_header("Content-Length", str(len(data)))
                self.end_headers()
                self.wfile.write(data)
            elif path == "/events":
                self._serve_events()
            elif path == "/catalog":
                self._send_json(
                    [
                        {
                            "id": e.id,
                            "description": e.description,
                            "output": str(e.preferred_output),
                            "shots": e.shots,
                        }
                        for e in scenes.catalog()
                    ]
                )
            else:
                self._serve_static(path)

        def _serve_events(self):
            q = gateway.subscribe()
            self.close_connection = True  # stream has no length; end by closing
            try:
                self.send_response(200)
                self.send_header("Content-Type", "text/event-stream")
                self.send_header("Cache-Control", "no-cache")
                self.end_headers()
                hello = {
                    "timestamp": gateway.clock.now(),
                    "kind": "hello",
                    "payload": gateway.snapshot(),
                }
                self.wfile.write(f"data: {json.dumps(hello)}\n\n".encode("utf-8"))
                self.wfile.flush()
                while True:
                    try:
                        item = q.get(timeout=5.0)
                    except queue.Empty:
                        self.wfile.write(b": ping\n\n")
                        self.wfile.flush()
                        continue
                    if item is None:
                        break
                    self.wfile.write(f"data: {json.dumps(item)}\n\n".encode("utf-8"))
                    self.wfile.flush()
            except (BrokenPipeError, ConnectionResetError):
                pass
            finally:
                gateway.unsubscribe(q)

        def _serve_static(self, path: str):
            root = gateway.config.static_dir
            if not root:
                self._fail(404, f"no such path {path}")
                return
            if path == "/":
                path = "/index.html"
            full = os.path.realpath(os.path.join(root, path.lstrip("/")))
            if not full.startswith(os.path.realpath(root) + os.sep):
                self._fail(403, "forbidden")
                return
            if not os.path.isfile(full):
                self._fail(404, f"no such path {path}")
                return
            types = {
                ".html": "text/html; charset=utf-8",
                ".js": "text/javascript; charset=utf-8",
                ".css": "text/css; charset=utf-8",
                ".map": "application/json",
                ".svg": "image/svg+xml",
                ".png": "image/png",
            }
            content_type = types.get(os.path.splitext(full)[1], "application/octet-stream")
            with open(full, "rb") as fh:
                data = fh.read()
            self.send_response(200)
            self.send_header("Content-Type", content_type)
            self.send_header("Content-Length", str(len(data)))
            self.end_headers()
            self.wfile.write(data)

        # -- POST -----------------------------------------------------------

        def do_POST(self):
            path = self.path.split("?", 1)[0]
            try:
                # Read the body before routing: an unread body left on a
                # keep-alive socket is parsed as the next request line.
                body = self._read_body()
                if path.startswith("/switch/") and path.endswith("/press"):
                    middle = path[len("/switch/") : -len("/press")]
                    try:
                        index = int(middle)
                    except ValueError:
                        self._fail(404, f"bad switch index {middle!r}")
                        return
                    if not 1 <= index <= gateway.config.n:
                        raise ValueError(
                            f"switch index must be in 1..{gateway.config.n}, got {index}"
                        )
                    snapshot = gateway.submit(
                        lambda ts: SwitchPressed(timestamp=ts, index=index)
                    )
                    self._send_json(snapshot)
                elif path == "/mode":
                    mode_name = body.get("mode")
                    if mode_name not in API_MODES:
                        raise ValueError(
                            f"mode must be one of {sorted(API_MODES)}, got {mode_name!r}"
                        )
                    snapshot = gateway.submit(
                        lambda ts: ModeChanged(timestamp=ts, mode=API_MODES[mode_name])
                    )
                    self._send_json(snapshot)
                elif path == "/scene":
                    if "scene" not in body:
                        raise ValueError("body must carry a scene id")
                    snapshot = gateway.set_scene(body["scene"], body.get("run"))
                    self._send_json(snapshot)
                elif path == "/train":
                    self._send_json(gateway.train_now(body))
                elif path == "/clock":
                    snapshot = gateway.set_clock(paused=body.get("paused"), rate=body.get("rate"))
                    self._send_json(snapshot)
                else:
                    self._fail(404, f"no such path {path}")
            except ValueError as exc:
                self._fail(400, str(exc))
            except Exception as exc:  # keep the control plane alive
                self._fail(500, f"{type(exc).__name__}: {exc}")

    return Handler


def serve(config: GatewayConfig) -> Gateway:
    """Start a gateway and return it; caller owns stop()."""
    gateway = Gateway(config)
    gateway.start()
    return gateway
