"""Manual-automation switcher: a pure transition function over typed events.

The controller routes data among wall switches, the predictor, and the
facilities across three modes.  In both manual modes the controls mirror the
switches; with training enabled, settled frames become labeled samples.  In
automation mode frames become prediction requests and a majority vote over
the last k predicted labels drives the controls.

handle_event is pure: same state + same event gives the same new state and
the same ordered effects, which makes event logs replayable bit-for-bit.
Executing effects (actuation, persistence, prediction calls) is the runtime
shell's job.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Tuple, Union

from .codec import (
    ClassLabel,
    ControlVector,
    SwitchVector,
    controls_from_switches,
    decode_label,
    encode_label,
    toggle,
)
from .predictor import Prediction

DEFAULT_SETTLE_DELAY = 5.0
DEFAULT_MAJORITY_K = 3


class Mode(enum.Enum):
    MANUAL_NO_TRAINING = "manual"
    MANUAL_WITH_TRAINING = "manual_training"
    AUTOMATION = "automation"

    @property
    def is_manual(self) -> bool:
        return self is not Mode.AUTOMATION


class StaleEventError(ValueError):
    """Event timestamp precedes the last processed event."""


# --- events ---------------------------------------------------------------


@dataclass(frozen=True)
class SwitchPressed:
    timestamp: float
    index: int


@dataclass(frozen=True)
class FrameCaptured:
    timestamp: float
    frame: object  # anything with .features/.scene/.run/.timestamp


@dataclass(frozen=True)
class ModeChanged:
    timestamp: float
    mode: Mode


@dataclass(frozen=True)
class PredictionReady:
    timestamp: float
    prediction: Prediction


@dataclass(frozen=True)
class PredictionFailed:
    """Predictor timeout or protocol violation; automation degrades, controls hold."""

    timestamp: float
    reason: str


Event = Union[SwitchPressed, FrameCaptured, ModeChanged, PredictionReady, PredictionFailed]


# --- effects ---------------------------------------------------------------


@dataclass(frozen=True)
class EmitControl:
    controls: ControlVector


@dataclass(frozen=True)
class RecordSample:
    frame: object
    label: ClassLabel
    source: str  # manual_training | override


@dataclass(frozen=True)
class RequestPrediction:
    frame: object


@dataclass(frozen=True)
class Log:
    message: str


Effect = Union[EmitControl, RecordSample, RequestPrediction, Log]


# --- state -----------------------------------------------------------------


@dataclass(frozen=True)
class ControllerState:
    switches: SwitchVector
    controls: ControlVector
    mode: Mode
    settle_delay: float = DEFAULT_SETTLE_DELAY
    majority_k: int = DEFAULT_MAJORITY_K
    prediction_window: Tuple[int, ...] = field(default_factory=tuple)
    settle_until: float = 0.0
    degraded: bool = False
    last_frame: Optional[object] = None
    last_timestamp: float = 0.0


def initial_state(
    n: int = 4,
    settle_delay: float = DEFAULT_SETTLE_DELAY,
    majority_k: int = DEFAULT_MAJORITY_K,
) -> ControllerState:
    """Boot state: all switches off, controls mirroring them, manual mode."""
    if majority_k < 1:
        raise ValueError("majority_k must be >= 1")
    if settle_delay < 0:
        raise ValueError("settle_delay must be >= 0")
    off = SwitchVector(bits=(0,) * n)
    return ControllerState(
        switches=off,
        controls=controls_from_switches(off),
        mode=Mode.MANUAL_NO_TRAINING,
        settle_delay=settle_delay,
        majority_k=majority_k,
    )


def majority(window: Sequence[int]) -> Optional[int]:
    """The label occurring more than half the time, else None."""
    if not window:
        raise ValueError("majority of an empty window is undefined")
    counts = {}
    for label in window:
        counts[label] = counts.get(label, 0) + 1
    best, best_count = max(counts.items(), key=lambda kv: kv[1])
    return best if best_count * 2 > len(window) else None


def handle_event(state: ControllerState, event: Event) -> Tuple[ControllerState, Tuple[Effect, ...]]:
    """Apply one event; returns the new state and the ordered effects."""
    now = event.timestamp
    if now < state.last_timestamp:
        raise StaleEventError(f"event at {now} precedes last processed {state.last_timestamp}")

    if isinstance(event, SwitchPressed):
        return _on_switch_pressed(state, event)
    if isinstance(event, FrameCaptured):
        return _on_frame(state, event)
    if isinstance(event, ModeChanged):
        return _on_mode_changed(state, event)
    if isinstance(event, PredictionReady):
        return _on_prediction(state, event)
    if isinstance(event, PredictionFailed):
        return _on_prediction_failed(state, event)
    raise TypeError(f"unknown event type {type(event).__name__}")


def _emit_if_changed(old: ControlVector, new: ControlVector) -> Tuple[Effect, ...]:
    # Repeated identical control emissions are suppressed to keep the bus quiet.
    return (EmitControl(controls=new),) if new.bits != old.bits else ()


def _on_switch_pressed(state: ControllerState, event: SwitchPressed):
    now = event.timestamp
    switches = toggle(state.switches, event.index)
    controls = controls_from_switches(switches)
    effects: Tuple[Effect, ...] = _emit_if_changed(state.controls, controls)
    settled = now >= state.settle_until
    if state.mode is Mode.AUTOMATION:
        # User override: immediate actuation plus a corrective sample for the
        # scene on screen, unless we are still inside a settle window (the
        # previous press already marked the scene as transitional).
        if state.last_frame is not None and settled:
            effects = effects + (
                RecordSample(frame=state.last_frame, label=encode_label(switches), source="override"),
            )
        else:
            effects = effects + (Log(message=f"override at t={now} without recordable frame"),)
    new_state = replace(
        state,
        switches=switches,
        controls=controls,
        settle_until=now + state.settle_delay,
        prediction_window=(),
        last_timestamp=now,
    )
    return new_state, effects


def _on_frame(state: ControllerState, event: FrameCaptured):
    now = event.timestamp
    base = replace(state, last_frame=event.frame, last_timestamp=now)
    if state.mode is Mode.MANUAL_WITH_TRAINING:
        if now >= state.settle_until:
            label = encode_label(state.switches)
            return base, (RecordSample(frame=event.frame, label=label, source="manual_training"),)
        return base, (Log(message=f"frame at t={now} inside settle window, not recorded"),)
    if state.mode is Mode.AUTOMATION:
        if now >= state.settle_until:
            return base, (RequestPrediction(frame=event.frame),)
        return base, (Log(message=f"frame at t={now} suppressed by settle window"),)
    return base, (Log(message=f"frame at t={now} observed in manual mode"),)


def _on_mode_changed(state: ControllerState, event: ModeChanged):
    now = event.timestamp
    if event.mode.is_manual:
        controls = controls_from_switches(state.switches)
        effects = _emit_if_changed(state.controls, controls)
        new_state = replace(
            state, mode=event.mode, controls=controls, prediction_window=(), last_timestamp=now
        )
        return new_state, effects
    new_state = replace(state, mode=event.mode, prediction_window=(), last_timestamp=now)
    return new_state, (Log(message=f"automation engaged at t={now}"),)


def _on_prediction(state: ControllerState, event: PredictionReady):
    now = event.timestamp
    if state.mode is not Mode.AUTOMATION:
        return (
            replace(state, last_timestamp=now),
            (Log(message="prediction discarded outside automation"),),
        )
    if now < state.settle_until:
        return (
            replace(state, last_timestamp=now),
            (Log(message="prediction discarded inside settle window"),),
        )
    label = event.prediction.argmax.value
    window = (state.prediction_window + (label,))[-state.majority_k :]
    new_state = replace(state, prediction_window=window, degraded=False, last_timestamp=now)
    if len(window) < state.majority_k:
        return new_state, (Log(message=f"prediction window filling ({len(window)}/{state.majority_k})"),)
    winner = majority(window)
    if winner is None:
        return new_state, (Log(message="prediction window tied, controls held"),)
    current = encode_label(SwitchVector(bits=state.controls.bits)).value
    if winner == current:
        return new_state, ()
    controls = decode_label(ClassLabel(value=winner, n=state.controls.n))
    new_state = replace(new_state, controls=controls)
    return new_state, (EmitControl(controls=controls),)


def _on_prediction_failed(state: ControllerState, event: PredictionFailed):
    now = event.timestamp
    if state.mode is Mode.AUTOMATION:
        new_state = replace(state, degraded=True, last_timestamp=now)
        return new_state, (Log(message=f"predictor failed, holding controls: {event.reason}"),)
    return replace(state, last_timestamp=now), (Log(message=f"predictor failure ignored: {event.reason}"),)
