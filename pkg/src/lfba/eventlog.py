"""Machine-parseable event/effect log lines and replay support.

One JSON object per line: {"event": ..., "effects": [...]}.  Frames are
logged as metadata plus hex-float features (rasters are reproducible from
the generator, so they stay out of the log).  Replaying a log through the
controller reproduces the effect trace bit-for-bit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, List, Tuple

import numpy as np

from .codec import ClassLabel, decode_label
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
    SwitchPressed,
    handle_event,
)
from .predictor import Prediction


@dataclass(frozen=True)
class ReplayFrame:
    """Frame stand-in reconstructed from a log line: features plus provenance."""

    features: np.ndarray
    scene: str
    run: int
    timestamp: float


def _frame_to_json(frame) -> dict:
    return {
        "scene": frame.scene,
        "run": frame.run,
        "timestamp": frame.timestamp,
        "features": [float.hex(float(v)) for v in frame.features],
    }


def _frame_from_json(obj: dict) -> ReplayFrame:
    return ReplayFrame(
        features=np.array([float.fromhex(v) for v in obj["features"]], dtype=np.float64),
        scene=obj["scene"],
        run=obj["run"],
        timestamp=obj["timestamp"],
    )


def event_to_json(event: Event) -> dict:
    if isinstance(event, SwitchPressed):
        return {"kind": "switch_pressed", "timestamp": event.timestamp, "index": event.index}
    if isinstance(event, FrameCaptured):
        return {"kind": "frame_captured", "timestamp": event.timestamp, "frame": _frame_to_json(event.frame)}
    if isinstance(event, ModeChanged):
        return {"kind": "mode_changed", "timestamp": event.timestamp, "mode": event.mode.value}
    if isinstance(event, PredictionReady):
        return {
            "kind": "prediction_ready",
            "timestamp": event.timestamp,
            "probs": [float.hex(float(p)) for p in event.prediction.probs],
            "argmax": event.prediction.argmax.value,
            "n": event.prediction.argmax.n,
        }
    if isinstance(event, PredictionFailed):
        return {"kind": "prediction_failed", "timestamp": event.timestamp, "reason": event.reason}
    raise TypeError(f"unknown event type {type(event).__name__}")


def event_from_json(obj: dict) -> Event:
    kind = obj.get("kind")
    if kind == "switch_pressed":
        return SwitchPressed(timestamp=obj["timestamp"], index=obj["index"])
    if kind == "frame_captured":
        return FrameCaptured(timestamp=obj["timestamp"], frame=_frame_from_json(obj["frame"]))
    if kind == "mode_changed":
        return ModeChanged(timestamp=obj["timestamp"], mode=Mode(obj["mode"]))
    if kind == "prediction_ready":
        probs = np.array([float.fromhex(p) for p in obj["probs"]], dtype=np.float64)
        prediction = Prediction(probs=probs, argmax=ClassLabel(value=obj["argmax"], n=obj["n"]))
        return PredictionReady(timestamp=obj["timestamp"], prediction=prediction)
    if kind == "prediction_failed":
        return PredictionFailed(timestamp=obj["timestamp"], reason=obj["reason"])
    raise ValueError(f"unknown event kind {kind!r}")


def effect_to_json(effect) -> dict:
    if isinstance(effect, EmitControl):
        return {"kind": "emit_control", "bits": str(effect.controls)}
    if isinstance(effect, RecordSample):
        return {
            "kind": "record_sample",
            "label": effect.label.value,
            "bits": str(decode_label(effect.label)),
            "source": effect.source,
            "frame": _frame_to_json(effect.frame),
        }
    if isinstance(effect, RequestPrediction):
        return {"kind": "request_prediction", "frame": _frame_to_json(effect.frame)}
    if isinstance(effect, Log):
        return {"kind": "log", "message": effect.message}
    raise TypeError(f"unknown effect type {type(effect).__name__}")


def log_line(event: Event, effects: Iterable) -> str:
    return json.dumps({"event": event_to_json(event), "effects": [effect_to_json(e) for e in effects]})


def read_log(path: str) -> List[Tuple[Event, List[dict]]]:
    """Parse a log file into (event, logged effect dicts) pairs."""
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                out.append((event_from_json(obj["event"]), obj.get("effects", [])))
            except (ValueError, KeyError) as exc:
                raise ValueError(f"line {lineno}: bad log record: {exc}") from exc
    return out


def replay(events: Iterable[Event], state: ControllerState) -> Tuple[ControllerState, List[List[dict]]]:
    """Re-run events through the controller; returns final state and effect traces."""
    traces = []
    for event in events:
        state, effects = handle_event(state, event)
        traces.append([effect_to_json(e) for e in effects])
    return state, traces
