"""Room automation without hand-written rules: a camera watches the room,
wall switches label what people actually wanted, and a trained classifier
drives the facilities once it has seen enough presses."""

__version__ = "0.1.0"

from .codec import (
    ClassLabel,
    ControlVector,
    SwitchVector,
    decode_label,
    encode_label,
    parse_bits,
    toggle,
)
from .controller import (
    ControllerState,
    Mode,
    handle_event,
    initial_state,
)
from .dataset import Dataset, SampleRecord, load, save
from .predictor import PredictorModel, TrainConfig, predict, train
from .scenes import GeneratorConfig, catalog, generate_dataset, render_frame

__all__ = [
    "ClassLabel",
    "ControlVector",
    "ControllerState",
    "Dataset",
    "GeneratorConfig",
    "Mode",
    "PredictorModel",
    "SampleRecord",
    "SwitchVector",
    "TrainConfig",
    "__version__",
    "catalog",
    "decode_label",
    "encode_label",
    "generate_dataset",
    "handle_event",
    "initial_state",
    "load",
    "parse_bits",
    "predict",
    "render_frame",
    "save",
    "toggle",
    "train",
]
